//! Primitive `k`-cycles as classes `[x_1, …, x_k]` modulo cyclic shift.

use serde::Serialize;
use std::cmp::Ordering;
use thiserror::Error;

use super::enumerate::{enumerate_fixed_points, lex_total, EnumerationOptions, FixedPointSet};
use super::iterate;
use crate::maps::{MapError, SelfMap};
use crate::point::{fuzzy_lex_cmp, BallPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleViolation {
    #[error("link {index} misses by {defect:e} (tolerance {tol:e})")]
    Link { index: usize, defect: f64, tol: f64 },
    #[error("point {index} returns after {shift} steps (distance {distance:e})")]
    NotPrimitive { index: usize, shift: usize, distance: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// An orbit `[x_1, …, x_k]` with `φ(x_i) = x_{i+1}` (indices mod `k`),
/// stored in its canonical rotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleClass {
    pub order: usize,
    pub points: Vec<BallPoint>,
    /// `|φ(x_i) − x_{i+1}|` for each link.
    pub residuals: Vec<f64>,
}

/// Index of the rotation whose point sequence is lexicographically
/// smallest, comparing flattened real coordinates with ties below
/// `tie_tol` passed on to the next coordinate.
pub fn canonical_rotation(points: &[BallPoint], tie_tol: f64) -> usize {
    let k = points.len();
    let cmp = |a: usize, b: usize| -> Ordering {
        for j in 0..k {
            let o = fuzzy_lex_cmp(&points[(a + j) % k].to_reals(), &points[(b + j) % k].to_reals(), tie_tol);
            if o.is_ne() {
                return o;
            }
        }
        Ordering::Equal
    };
    (1..k).fold(0, |best, s| if cmp(s, best) == Ordering::Less { s } else { best })
}

impl CycleClass {
    /// Builds the class through `start`: `[start, φ(start), …, φ^{k−1}(start)]`.
    pub fn from_orbit(map: &dyn SelfMap, start: &BallPoint, k: usize, tie_tol: f64) -> Result<Self, MapError> {
        let mut points = Vec::with_capacity(k);
        let mut w = start.clone();
        for _ in 0..k {
            points.push(w.clone());
            w = map.apply(&w)?;
        }
        Self::from_points(map, points, tie_tol)
    }

    /// Canonicalises `points` and measures the link residuals under `map`.
    pub fn from_points(map: &dyn SelfMap, mut points: Vec<BallPoint>, tie_tol: f64) -> Result<Self, MapError> {
        let k = points.len();
        let s = canonical_rotation(&points, tie_tol);
        points.rotate_left(s);
        let residuals = (0..k)
            .map(|i| Ok(map.apply(&points[i])?.distance(&points[(i + 1) % k])))
            .collect::<Result<Vec<_>, MapError>>()?;
        Ok(CycleClass { order: k, points, residuals })
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// True when both classes have the same order and point sets agreeing
    /// within `radius`.
    pub fn same_class(&self, other: &CycleClass, radius: f64) -> bool {
        self.order == other.order
            && self.points.iter().all(|p| other.points.iter().any(|q| p.distance(q) <= radius))
            && other.points.iter().all(|p| self.points.iter().any(|q| p.distance(q) <= radius))
    }

    /// Checks the consecutive-mapping and primitivity invariants.
    pub fn validate(&self, map: &dyn SelfMap, tol: f64, dedup_radius: f64) -> Result<(), CycleViolation> {
        let k = self.order;
        for i in 0..k {
            let defect = map.apply(&self.points[i])?.distance(&self.points[(i + 1) % k]);
            if !(defect <= tol) {
                return Err(CycleViolation::Link { index: i, defect, tol });
            }
            let mut w = self.points[i].clone();
            for shift in 1..k {
                w = map.apply(&w)?;
                let distance = w.distance(&self.points[i]);
                if distance <= dedup_radius {
                    return Err(CycleViolation::NotPrimitive { index: i, shift, distance });
                }
            }
        }
        Ok(())
    }

    /// Worst closure defect `max_i |φ^k(x_i) − x_i|`.
    pub fn closure_defect(&self, map: &dyn SelfMap) -> Result<f64, MapError> {
        self.points
            .iter()
            .map(|p| Ok(iterate(map, p, self.order)?.distance(p)))
            .try_fold(0.0f64, |acc, d: Result<f64, MapError>| Ok(acc.max(d?)))
    }

    fn flattened(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| p.to_reals()).collect()
    }
}

/// The enumerated space of primitive `k`-cycles.
#[derive(Debug, Clone, Serialize)]
pub struct CycleSpace {
    pub order: usize,
    pub classes: Vec<CycleClass>,
    pub fixed_points: FixedPointSet,
    pub failures: Vec<String>,
}

impl CycleSpace {
    pub fn count(&self) -> usize {
        self.classes.len()
    }
}

/// Enumerates fixed points of `map^k`, keeps those of minimal period `k`
/// and groups their orbits into classes.
pub fn cycle_space(map: &dyn SelfMap, k: usize, opts: &EnumerationOptions) -> CycleSpace {
    let fixed_points = enumerate_fixed_points(map, k, opts);
    let radius = opts.newton.dedup_radius;
    let mut classes: Vec<CycleClass> = Vec::new();
    let mut failures = Vec::new();
    for rec in fixed_points.records.iter().filter(|r| r.minimal_period == k) {
        if classes.iter().any(|c| c.points.iter().any(|p| p.distance(&rec.point) <= radius)) {
            continue;
        }
        match CycleClass::from_orbit(map, &rec.point, k, radius) {
            Ok(class) => {
                if !classes.iter().any(|c| c.same_class(&class, radius)) {
                    classes.push(class);
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    classes.sort_by(|a, b| lex_total(&a.flattened(), &b.flattened()));
    CycleSpace { order: k, classes, fixed_points, failures }
}
