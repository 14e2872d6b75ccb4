//! Grid-seeded search for all fixed points of an iterate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::TAU;

use super::newton::{newton_fixed_point, polish_fixed_point, NewtonOptions, NewtonOutcome};
use super::FixedPointRecord;
use crate::maps::SelfMap;
use crate::params::Params;
use crate::point::BallPoint;

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationOptions {
    /// Grid points per real dimension over `[−R, R]^{2N}` (cell centres).
    pub grid_resolution: usize,
    /// Actions `ℓ/R²` of the seed rings on the invariant plane.
    pub ring_levels: Vec<f64>,
    /// Seeds per ring.
    pub ring_count: usize,
    pub newton: NewtonOptions,
}

impl EnumerationOptions {
    pub fn from_params(params: &Params, grid_resolution: usize) -> Self {
        EnumerationOptions {
            grid_resolution,
            ring_levels: vec![0.4, 0.5, 0.6],
            ring_count: 64 * params.k as usize,
            newton: NewtonOptions::from_params(params),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: BallPoint,
    pub reason: String,
}

/// Deduplicated fixed points of `mapⁿ` together with search statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub iterate_order: usize,
    pub records: Vec<FixedPointRecord>,
    pub seeds: usize,
    pub converged: usize,
    pub no_convergence: usize,
    pub singular: usize,
    pub failures: Vec<SeedFailure>,
}

/// Seed points: the origin, a cell-centred grid clipped to the ball and
/// rings on the invariant plane `z_1 = … = z_{N−1} = 0`.
pub fn seeds(n: usize, radius: f64, opts: &EnumerationOptions) -> Vec<BallPoint> {
    let mut out = vec![BallPoint::origin(n)];
    let g = opts.grid_resolution;
    let dims = 2 * n;
    if g > 0 {
        let total = g.checked_pow(dims as u32).expect("seed grid too large");
        let node = |i: usize| -radius + (2 * i + 1) as f64 * radius / g as f64;
        let mut reals = vec![0.0; dims];
        for mut index in 0..total {
            for r in reals.iter_mut() {
                *r = node(index % g);
                index /= g;
            }
            let z = BallPoint::from_reals(&reals);
            if z.in_ball(radius) {
                out.push(z);
            }
        }
    }
    for &level in &opts.ring_levels {
        let r = (level * radius * radius).sqrt();
        for i in 0..opts.ring_count {
            let mut coords = vec![Complex64::new(0.0, 0.0); n];
            coords[n - 1] = Complex64::from_polar(r, TAU * i as f64 / opts.ring_count as f64);
            out.push(BallPoint::new(coords));
        }
    }
    out
}

/// Total order used for sorting output: lexicographic on coordinates
/// quantised to multiples of `quantum`, then on the exact values.
pub(crate) fn point_order(a: &BallPoint, b: &BallPoint, quantum: f64) -> Ordering {
    let key = |z: &BallPoint| -> Vec<f64> { z.to_reals().iter().map(|x| (x / quantum).round() + 0.0).collect() };
    lex_total(&key(a), &key(b)).then_with(|| lex_total(&a.to_reals(), &b.to_reals()))
}

pub(crate) fn lex_total(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Fixed points of `mapⁿ`, deduplicated within `dedup_radius`, polished
/// and sorted in canonical coordinate order. Seeds run in parallel; the
/// reduction is independent of completion order.
pub fn enumerate_fixed_points(map: &dyn SelfMap, n: usize, opts: &EnumerationOptions) -> FixedPointSet {
    let seeds = seeds(map.dim(), map.radius(), opts);
    let outcomes: Vec<NewtonOutcome> =
        seeds.par_iter().map(|s| newton_fixed_point(map, n, s, &opts.newton)).collect();

    let mut set = FixedPointSet {
        iterate_order: n,
        records: Vec::new(),
        seeds: seeds.len(),
        converged: 0,
        no_convergence: 0,
        singular: 0,
        failures: Vec::new(),
    };
    let mut converged = Vec::new();
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        match outcome {
            NewtonOutcome::Converged(r) => converged.push(r),
            NewtonOutcome::NoConvergence { .. } => set.no_convergence += 1,
            NewtonOutcome::SingularJacobian { .. } => set.singular += 1,
            NewtonOutcome::MapFailure { error, .. } => {
                set.failures.push(SeedFailure { seed: seed.clone(), reason: error.to_string() })
            }
        }
    }
    set.converged = converged.len();
    let representatives = dedup_records(converged, opts.newton.dedup_radius);
    let polished: Vec<FixedPointRecord> =
        representatives.par_iter().map(|r| polish_fixed_point(map, r, &opts.newton)).collect();
    set.records = dedup_records(polished, opts.newton.dedup_radius);
    set
}

/// Greedy clustering in seed order; each cluster keeps its lowest-residual
/// member.
pub(crate) fn dedup_records(records: Vec<FixedPointRecord>, radius: f64) -> Vec<FixedPointRecord> {
    let mut reps: Vec<FixedPointRecord> = Vec::new();
    for rec in records {
        match reps.iter_mut().find(|r| r.point.distance(&rec.point) <= radius) {
            Some(existing) => {
                if rec.residual < existing.residual {
                    *existing = rec;
                }
            }
            None => reps.push(rec),
        }
    }
    reps.sort_by(|a, b| point_order(&a.point, &b.point, radius));
    reps
}
