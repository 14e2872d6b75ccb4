//! The parity obstruction to square roots.
//!
//! If `φ = ψ²`, then `ψ` commutes with `φ` and `[x_1, …, x_{2k}] ↦
//! [ψ(x_1), …, ψ(x_{2k})]` is an involution of the `2k`-cycles of `φ`.
//! A fixed class would give `ψ(x_i) = φ^r(x_i)` for some `r`, hence
//! `φ^{2r−1}(x_i) = x_i`; combined with `φ^{2k}(x_i) = x_i` this yields
//! `φ^g(x_i) = x_i` for `g = gcd(2r − 1, 2k)`, which is odd and smaller than
//! `2k`, contradicting primitivity. So the involution is free and a finite
//! set of `2k`-cycles of a square has even cardinality.
//!
//! The argument only uses set dynamics, so it applies to any self-map
//! handled here, not just Hamiltonian ones. Some texts write the greatest
//! common divisor in that step as "lcd"; it is the gcd computed by
//! [`gcd_certified`].

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::CycleClass;
use crate::maps::{MapError, MapInfo, SelfMap};
use crate::params::Params;
use crate::point::BallPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObstructionError {
    #[error("the parity obstruction applies to even cycle orders only (got {0})")]
    OddOrder(usize),
    #[error("gcd(0, 0) is undefined")]
    BothZero,
    #[error("psi∘psi misses the cycle link at index {index} by {defect:e}")]
    NotASquareRoot { index: usize, defect: f64 },
    #[error("involution image is not a primitive cycle: {0}")]
    Image(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NoSquareRoot,
    Inconclusive,
}

/// Search metadata attached to a certificate so that the completeness of
/// the enumeration can be judged.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationEvidence {
    pub map: String,
    pub grid_resolution: usize,
    pub seeds: usize,
    pub newton_tol: f64,
    pub dedup_radius: f64,
}

/// Outcome of the parity test. The verdict is only as complete as the
/// enumeration behind `evidence`.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub cycle_order: usize,
    pub cycle_count: usize,
    pub evidence: Vec<CycleClass>,
    pub params: Option<Params>,
    pub enumeration: Option<EnumerationEvidence>,
}

/// `NoSquareRoot` iff the number of `order`-cycles is odd.
pub fn parity_certificate(
    cycles: &[CycleClass],
    order: usize,
    params: Option<&Params>,
) -> Result<Certificate, ObstructionError> {
    if order % 2 != 0 || order == 0 {
        return Err(ObstructionError::OddOrder(order));
    }
    let count = cycles.len();
    Ok(Certificate {
        verdict: if count % 2 == 1 { Verdict::NoSquareRoot } else { Verdict::Inconclusive },
        cycle_order: order,
        cycle_count: count,
        evidence: cycles.to_vec(),
        params: params.copied(),
        enumeration: None,
    })
}

/// `ψ∘ψ` for a borrowed map.
struct Squared<'a>(&'a dyn SelfMap);

impl SelfMap for Squared<'_> {
    fn info(&self) -> MapInfo {
        let inner = self.0.info();
        MapInfo { name: format!("({})^2", inner.name), params: inner.params }
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn radius(&self) -> f64 {
        self.0.radius()
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        self.0.apply(&self.0.apply(z)?)
    }
}

/// The class `[ψ(x_1), …, ψ(x_{2k})]`, canonicalised.
///
/// Fails when `ψ²` does not carry each `x_i` to `x_{i+1}` within `tol`, or
/// when the image is not a primitive cycle of `ψ²`.
pub fn milnor_involution(
    psi: &dyn SelfMap,
    cycle: &CycleClass,
    tol: f64,
    dedup_radius: f64,
) -> Result<CycleClass, ObstructionError> {
    let phi = Squared(psi);
    let k = cycle.order;
    for i in 0..k {
        let defect = phi.apply(&cycle.points[i])?.distance(&cycle.points[(i + 1) % k]);
        if !(defect <= tol) {
            return Err(ObstructionError::NotASquareRoot { index: i, defect });
        }
    }
    let image = cycle.points.iter().map(|p| psi.apply(p)).collect::<Result<Vec<_>, _>>()?;
    let class = CycleClass::from_points(&phi, image, dedup_radius)?;
    class
        .validate(&phi, tol, dedup_radius)
        .map_err(|e| ObstructionError::Image(e.to_string()))?;
    Ok(class)
}

#[derive(Debug, Clone, Serialize)]
pub enum ActionViolation {
    /// `ψ∘ψ` and `φ` disagree on the class.
    NotSquare { class: usize, defect: f64 },
    /// `ψ∘φ` and `φ∘ψ` disagree on the class.
    NotCommuting { class: usize, defect: f64 },
    /// The class is its own image; impossible for a genuine square root.
    FixedClass { class: usize },
    /// The image is not among the supplied classes.
    MissingImage { class: usize },
    /// The involution could not be evaluated.
    Failed { class: usize, reason: String },
}

/// Result of [`check_free_action`].
#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    /// `(class, image class)` for each class with a located image.
    pub images: Vec<(usize, usize)>,
    /// Two-element orbits `{i, j}`, `i < j`.
    pub pairs: Vec<(usize, usize)>,
    pub violations: Vec<ActionViolation>,
    pub max_square_defect: f64,
    pub max_commutation_defect: f64,
    /// Every class is matched with a distinct partner whose image is itself.
    pub free: bool,
}

/// Checks that `[x_i] ↦ [ψ(x_i)]` pairs up the supplied `2k`-cycles of `φ`
/// into two-element orbits.
pub fn check_free_action(
    psi: &dyn SelfMap,
    phi: &dyn SelfMap,
    cycles: &[CycleClass],
    tol: f64,
    dedup_radius: f64,
) -> PairingReport {
    let mut report = PairingReport {
        images: Vec::new(),
        pairs: Vec::new(),
        violations: Vec::new(),
        max_square_defect: 0.0,
        max_commutation_defect: 0.0,
        free: true,
    };
    let sq = Squared(psi);
    let mut image_of = vec![None; cycles.len()];
    for (i, class) in cycles.iter().enumerate() {
        let mut square_defect = 0.0f64;
        let mut comm_defect = 0.0f64;
        for p in &class.points {
            let sample = (|| -> Result<(f64, f64), MapError> {
                let fp = phi.apply(p)?;
                let sq_defect = sq.apply(p)?.distance(&fp);
                let comm = psi.apply(&fp)?.distance(&phi.apply(&psi.apply(p)?)?);
                Ok((sq_defect, comm))
            })();
            match sample {
                Ok((s, c)) => {
                    square_defect = square_defect.max(s);
                    comm_defect = comm_defect.max(c);
                }
                Err(e) => report.violations.push(ActionViolation::Failed { class: i, reason: e.to_string() }),
            }
        }
        report.max_square_defect = report.max_square_defect.max(square_defect);
        report.max_commutation_defect = report.max_commutation_defect.max(comm_defect);
        if square_defect > tol {
            report.violations.push(ActionViolation::NotSquare { class: i, defect: square_defect });
        }
        if comm_defect > tol {
            report.violations.push(ActionViolation::NotCommuting { class: i, defect: comm_defect });
        }

        let image = class.points.iter().map(|p| psi.apply(p)).collect::<Result<Vec<_>, _>>();
        let image = match image.and_then(|pts| CycleClass::from_points(phi, pts, dedup_radius)) {
            Ok(c) => c,
            Err(e) => {
                report.violations.push(ActionViolation::Failed { class: i, reason: e.to_string() });
                continue;
            }
        };
        match cycles.iter().position(|c| c.same_class(&image, dedup_radius)) {
            Some(j) if j == i => report.violations.push(ActionViolation::FixedClass { class: i }),
            Some(j) => {
                image_of[i] = Some(j);
                report.images.push((i, j));
            }
            None => report.violations.push(ActionViolation::MissingImage { class: i }),
        }
    }
    for (i, img) in image_of.iter().enumerate() {
        if let Some(j) = *img {
            if i < j && image_of[j] == Some(i) {
                report.pairs.push((i, j));
            }
        }
    }
    report.free = report.violations.is_empty() && 2 * report.pairs.len() == cycles.len();
    report
}

/// Result of [`check_square_root`].
#[derive(Debug, Clone, Serialize)]
pub struct SquareRootReport {
    pub is_square_root: bool,
    pub samples: usize,
    pub max_defect: f64,
    pub max_commutation_defect: f64,
    pub worst: Option<Vec<f64>>,
    pub failures: usize,
}

/// Tests `ψ∘ψ = φ` on sample points; also reports `max |ψ∘φ − φ∘ψ|`.
pub fn check_square_root(phi: &dyn SelfMap, psi: &dyn SelfMap, samples: &[BallPoint], tol: f64) -> SquareRootReport {
    let mut report = SquareRootReport {
        is_square_root: true,
        samples: samples.len(),
        max_defect: 0.0,
        max_commutation_defect: 0.0,
        worst: None,
        failures: 0,
    };
    for z in samples {
        let eval = (|| -> Result<(f64, f64), MapError> {
            let fz = phi.apply(z)?;
            let pz = psi.apply(z)?;
            let defect = psi.apply(&pz)?.distance(&fz);
            let comm = psi.apply(&fz)?.distance(&phi.apply(&pz)?);
            Ok((defect, comm))
        })();
        match eval {
            Ok((d, c)) => {
                if d > report.max_defect {
                    report.max_defect = d;
                    report.worst = Some(z.to_reals());
                }
                report.max_commutation_defect = report.max_commutation_defect.max(c);
            }
            Err(_) => report.failures += 1,
        }
    }
    report.is_square_root = report.failures == 0 && report.max_defect <= tol;
    report
}

/// `gcd(a, b)` with a Bézout witness `g = n1·a + n2·b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bezout {
    pub gcd: i64,
    pub n1: i64,
    pub n2: i64,
}

/// Extended Euclidean algorithm; `gcd ≥ 1` unless both inputs vanish,
/// which is rejected.
pub fn gcd_certified(a: i64, b: i64) -> Result<Bezout, ObstructionError> {
    if a == 0 && b == 0 {
        return Err(ObstructionError::BothZero);
    }
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (old_r, old_s, old_t) = (-old_r, -old_s, -old_t);
    }
    Ok(Bezout { gcd: old_r, n1: old_s, n2: old_t })
}
