//! Numerical checks of the structural properties of the construction.
//!
//! Each check produces a [`CheckReport`] whose verdict is `max_defect ≤
//! tolerance`. Random samples come from a ChaCha8 generator seeded per check;
//! the seed is stored in the report so every run can be replayed exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::construction::{radial_flow, weighted_action, Construction, Perturbation, RadialProfile};
use crate::dynamics::{cycle_space, enumerate_fixed_points, CycleSpace, EnumerationOptions, FixedPointSet};
use crate::maps::{self, MapError, MapHandle, SelfMap};
use crate::obstruction::gcd_certified;
use crate::params::{Params, ParamsError};
use crate::point::{BallPoint, PolarLast};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Real coordinates of the sample attaining `max_defect`.
    pub witness: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Samples left out because a precondition did not hold.
    pub skipped: usize,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

const MAX_WARNINGS: usize = 5;

struct Tally {
    name: String,
    tolerance: f64,
    seed: Option<u64>,
    samples: usize,
    max_defect: f64,
    witness: Option<Vec<f64>>,
    skipped: usize,
    warnings: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new(name: &str, tolerance: f64, seed: Option<u64>) -> Self {
        Tally {
            name: name.into(),
            tolerance,
            seed,
            samples: 0,
            max_defect: 0.0,
            witness: None,
            skipped: 0,
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, defect: f64, witness: &[f64]) {
        self.samples += 1;
        let defect = if defect.is_nan() { f64::INFINITY } else { defect };
        if self.witness.is_none() || defect > self.max_defect {
            self.max_defect = defect;
            self.witness = Some(witness.to_vec());
        }
    }

    fn skip(&mut self, reason: String) {
        self.skipped += 1;
        self.warn(reason);
    }

    fn warn(&mut self, message: String) {
        if self.warnings.len() < MAX_WARNINGS {
            self.warnings.push(message);
        }
    }

    fn finish(mut self) -> CheckReport {
        if self.samples == 0 {
            self.warnings.insert(0, "no samples evaluated; pass is vacuous".into());
        }
        CheckReport {
            pass: self.max_defect <= self.tolerance,
            name: self.name,
            samples: self.samples,
            max_defect: self.max_defect,
            tolerance: self.tolerance,
            witness: self.witness,
            seed: self.seed,
            skipped: self.skipped,
            warnings: self.warnings,
            notes: self.notes,
        }
    }
}

/// The standard symplectic matrix on interleaved coordinates `(x1, y1, …)`.
fn omega(dims: usize) -> Vec<f64> {
    let mut w = vec![0.0; dims * dims];
    for b in (0..dims).step_by(2) {
        w[b * dims + b + 1] = 1.0;
        w[(b + 1) * dims + b] = -1.0;
    }
    w
}

/// `‖JᵀΩJ − Ω‖_max` with `J` the central-difference Jacobian of `map` at `z`.
///
/// Every stencil point must lie in the open ball.
pub fn symplectic_defect(map: &dyn SelfMap, z: &BallPoint, fd_step: f64) -> Result<f64, MapError> {
    let reals = z.to_reals();
    let dims = reals.len();
    let r2 = map.radius() * map.radius();
    let mut jac = vec![0.0; dims * dims];
    for j in 0..dims {
        let mut plus = reals.clone();
        let mut minus = reals.clone();
        plus[j] += fd_step;
        minus[j] -= fd_step;
        let (p, m) = (BallPoint::from_reals(&plus), BallPoint::from_reals(&minus));
        for s in [&p, &m] {
            if !(s.norm_sqr() < r2) {
                return Err(MapError::Escape { steps: 0, point: s.to_reals() });
            }
        }
        let fp = map.apply(&p)?.to_reals();
        let fm = map.apply(&m)?.to_reals();
        for i in 0..dims {
            jac[i * dims + j] = (fp[i] - fm[i]) / (2.0 * fd_step);
        }
    }
    let w = omega(dims);
    let mut defect: f64 = 0.0;
    for a in 0..dims {
        for b in 0..dims {
            let mut s = 0.0;
            for i in 0..dims {
                for k in 0..dims {
                    s += jac[i * dims + a] * w[i * dims + k] * jac[k * dims + b];
                }
            }
            defect = defect.max((s - w[a * dims + b]).abs());
        }
    }
    Ok(defect)
}

/// Uniform sample from the ball of radius `radius` by rejection.
pub fn sample_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> BallPoint {
    loop {
        let reals: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-radius..radius)).collect();
        let z = BallPoint::from_reals(&reals);
        if z.in_ball(radius) {
            return z;
        }
    }
}

fn plane_point(n: usize, ell: f64, theta: f64) -> BallPoint {
    PolarLast { head: vec![Complex64::new(0.0, 0.0); n - 1], ell, theta }.to_point()
}

/// `max_ν ||w_ν| − |z_ν||`.
fn modulus_defect(z: &BallPoint, w: &BallPoint) -> f64 {
    z.coords.iter().zip(&w.coords).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max)
}

/// Symplecticity of `map` on `samples` random points.
pub fn check_symplectic(name: &str, map: &dyn SelfMap, samples: usize, fd_step: f64, tol: f64, seed: u64) -> CheckReport {
    let mut tally = Tally::new(name, tol, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = map.radius() - 2.0 * fd_step;
    for _ in 0..samples {
        let z = sample_ball(&mut rng, map.dim(), inner);
        match symplectic_defect(map, &z, fd_step) {
            Ok(d) => tally.record(d, &z.to_reals()),
            Err(MapError::Escape { point, .. }) => tally.skip(format!("stencil point {point:?} outside the ball")),
            Err(e) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &z.to_reals());
            }
        }
    }
    tally.finish()
}

/// `|flow_H(z)_ν| = |z_ν|` on random points.
pub fn check_modulus_preservation(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let tol = 8.0 * f64::EPSILON * p.radius;
    let mut tally = Tally::new("flow_h_modulus", tol, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let z = sample_ball(&mut rng, p.n, p.radius);
        let t = rng.gen_range(-10.0..10.0);
        let w = construction.flow_h(&z, t);
        tally.record(modulus_defect(&z, &w), &z.to_reals());
    }
    tally.finish()
}

/// Integrator against the closed-form plateau solution for trajectories that
/// stay where `β ≡ 1`.
pub fn check_closed_form(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let mut tally = Tally::new("flow_f_closed_form", 1e-10 * p.r2(), Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = f64::from(construction.harmonic());
    let drift = 2.0 * p.epsilon * m;
    let (lo, hi) = (p.r2() / 3.0 + drift, 2.0 * p.r2() / 3.0 - drift);
    for _ in 0..samples {
        let z = plane_point(p.n, rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI));
        let polar = z.to_polar();
        let exact = PolarLast { ell: construction.plateau_action(polar.ell, polar.theta, 1.0), ..polar }.to_point();
        match construction.flow_f_integrated(&z, 1.0) {
            Ok(w) => tally.record(w.distance(&exact), &z.to_reals()),
            Err(e) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &z.to_reals());
            }
        }
    }
    tally.finish()
}

/// Conservation of `F` along the perturbation flow on the annulus where it
/// acts.
pub fn check_conservation(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let mut tally = Tally::new("flow_f_conservation", 1e-8, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let z = plane_point(p.n, rng.gen_range(p.r2() / 9.0..8.0 * p.r2() / 9.0), rng.gen_range(0.0..2.0 * PI));
        match construction.flow_f(&z, 1.0) {
            Ok(w) => {
                let d = (construction.perturbation_f(&w) - construction.perturbation_f(&z)).abs();
                tally.record(d, &z.to_reals());
            }
            Err(e) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &z.to_reals());
            }
        }
    }
    tally.finish()
}

/// Distance from `z` to `{0} ∪ {head = 0, |z_N|² = R²/2}`.
pub fn distance_to_unperturbed_fixed_set(z: &BallPoint, radius: f64) -> f64 {
    let origin = z.norm_sqr().sqrt();
    let head2: f64 = z.coords[..z.dim() - 1].iter().map(|c| c.norm_sqr()).sum();
    let radial = z.last().norm() - radius * std::f64::consts::FRAC_1_SQRT_2;
    origin.min((head2 + radial * radial).sqrt())
}

/// Every converged fixed point of `flow_H^{2k}` lies on `{0} ∪ C`.
pub fn check_fixed_set_unperturbed(set: &FixedPointSet, radius: f64) -> CheckReport {
    let mut tally = Tally::new("fixed_set_unperturbed", 1e-7 * radius, None);
    for rec in &set.records {
        tally.record(distance_to_unperturbed_fixed_set(&rec.point, radius), &rec.point.to_reals());
    }
    tally.notes.push(format!("{} seeds, {} converged, {} distinct", set.seeds, set.converged, set.records.len()));
    tally.finish()
}

/// `φ_H` advances `θ` on the circle `C` by exactly `π/k`.
pub fn check_circle_rotation(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let mut tally = Tally::new("circle_rotation", 1e-12, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = PI / f64::from(p.k);
    for _ in 0..samples {
        let z = plane_point(p.n, 0.5 * p.r2(), rng.gen_range(0.0..2.0 * PI));
        let w = construction.flow_h(&z, 1.0);
        tally.record((angle_advance(&z, &w) - target).abs(), &z.to_reals());
    }
    tally.finish()
}

/// `arg(w_N) − arg(z_N)` in `(−π, π]`.
fn angle_advance(z: &BallPoint, w: &BallPoint) -> f64 {
    (w.last() * z.last().conj()).arg()
}

/// Why `z` is outside the region where `Φ` must be a rigid rotation, if it is.
pub fn boundary_admissible(params: &Params, z: &BallPoint) -> Result<(), String> {
    let r2 = params.r2();
    let s = weighted_action(z);
    let ell = z.last().norm_sqr();
    if !(z.norm_sqr() <= r2) {
        return Err(format!("|z|² = {} exceeds R²", z.norm_sqr()));
    }
    if s < 8.0 * r2 / 9.0 {
        return Err(format!("weighted action {s} below 8R²/9"));
    }
    if ell > r2 / 9.0 && ell < 8.0 * r2 / 9.0 {
        return Err(format!("|z_N|² = {ell} inside the support of the cut-off"));
    }
    Ok(())
}

fn sample_outer_band(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> BallPoint {
    let r2 = radius * radius;
    let dir = loop {
        let reals: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = reals.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            break reals.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        }
    };
    let rho = rng.gen_range(8.0 * r2 / 9.0..r2).sqrt();
    BallPoint::from_reals(&dir.iter().map(|x| x * rho).collect::<Vec<_>>())
}

/// `Φ(z)` equals the boundary rotation on admissible outer-band points.
pub fn check_boundary_rigidity(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = *construction.params();
    let mut tally = Tally::new("boundary_rigidity", 1e-12 * p.radius, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = 0usize;
    let budget = 1000 * samples.max(1);
    while tally.samples < samples && rejected < budget {
        let z = sample_outer_band(&mut rng, p.n, p.radius);
        if boundary_admissible(&p, &z).is_err() {
            rejected += 1;
            continue;
        }
        match construction.phi(&z) {
            Ok(w) => tally.record(w.distance(&construction.boundary_rotation(&z)), &z.to_reals()),
            Err(e) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &z.to_reals());
            }
        }
    }
    if tally.samples < samples {
        tally.warn(format!("only {} admissible samples after {rejected} rejections", tally.samples));
    }
    tally.notes.push(format!("{rejected} candidates rejected by the precondition"));
    tally.finish()
}

/// Outcome of one rotation-step sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationStep {
    pub advance: f64,
    /// Action after the step.
    pub ell: f64,
    /// The advance equals `π/k` up to rounding.
    pub equality: bool,
    /// Amount by which the sample violates the claim; `0` when it holds.
    pub defect: f64,
}

/// Tolerance on equality `advance = π/k` and on the upper bound.
pub const ROTATION_SLACK: f64 = 8.0 * f64::EPSILON;

/// `0 < θ(Φ(z)) − θ(z) ≤ π/k`; at equality the image lies on `ℓ = R²/2`.
pub fn rotation_step(construction: &Construction, z: &BallPoint) -> Result<RotationStep, MapError> {
    let p = construction.params();
    let bound = PI / f64::from(p.k);
    let w = construction.phi(z)?;
    let advance = angle_advance(z, &w);
    let ell = w.last().norm_sqr();
    let equality = (advance - bound).abs() <= ROTATION_SLACK * bound;
    let defect = if !(advance > 0.0) {
        bound - advance
    } else if advance > bound * (1.0 + ROTATION_SLACK) {
        advance - bound
    } else if equality {
        let off = (ell - 0.5 * p.r2()).abs();
        if off > 1e-8 * p.r2() {
            off
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(RotationStep { advance, ell, equality, defect })
}

/// Rotation-step bound on invariant-plane samples with `ℓ ∈ [R²/3, 2R²/3]`,
/// preceded by the points `(R²/2, 0)`, `(0.4R², π/(2k))` and `(R²/9, 0)`.
pub fn check_rotation_step(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let mut tally = Tally::new("rotation_step", 0.0, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = p.r2();
    let mut points = Vec::with_capacity(samples + 3);
    if samples > 0 {
        points.push(plane_point(p.n, 0.5 * r2, 0.0));
        points.push(plane_point(p.n, 0.4 * r2, PI / (2.0 * f64::from(p.k))));
        points.push(plane_point(p.n, r2 / 9.0, 0.0));
    }
    for _ in 0..samples {
        points.push(plane_point(p.n, rng.gen_range(r2 / 3.0..=2.0 * r2 / 3.0), rng.gen_range(0.0..2.0 * PI)));
    }
    let mut equalities = 0;
    for z in &points {
        match rotation_step(construction, z) {
            Ok(step) => {
                equalities += usize::from(step.equality);
                tally.record(step.defect, &z.to_reals());
            }
            Err(e) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &z.to_reals());
            }
        }
    }
    tally.notes.push(format!("{equalities} samples attain the bound"));
    tally.finish()
}

/// `map^d(z) = z` within `10·tol` for every record, `d = gcd(minimal period,
/// iterate order)`.
pub fn check_gcd_law(map: &dyn SelfMap, set: &FixedPointSet, tol: f64) -> CheckReport {
    let mut tally = Tally::new(&format!("gcd_law[{}]", map.info().name), 10.0 * tol, None);
    let n = set.iterate_order;
    let mut premise = 0usize;
    for rec in &set.records {
        let a = rec.minimal_period as i64;
        let g = match gcd_certified(a, n as i64) {
            Ok(b) => b.gcd as usize,
            Err(e) => {
                tally.skip(e.to_string());
                continue;
            }
        };
        let reach = |steps: usize| -> Result<f64, MapError> {
            let mut w = rec.point.clone();
            for _ in 0..steps {
                w = map.apply(&w)?;
            }
            Ok(w.distance(&rec.point))
        };
        match (reach(rec.minimal_period), reach(n), reach(g)) {
            (Ok(da), Ok(db), Ok(dg)) => {
                premise += usize::from(da <= tol && db <= tol);
                tally.record(dg, &rec.point.to_reals());
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                tally.warn(e.to_string());
                tally.record(f64::INFINITY, &rec.point.to_reals());
            }
        }
    }
    tally.notes.push(format!("{premise} of {} records meet both premises within {tol:e}", set.records.len()));
    tally.finish()
}

/// Head coordinates of every enumerated cycle vanish.
pub fn check_plane_confinement(space: &CycleSpace, radius: f64) -> CheckReport {
    let mut tally = Tally::new("plane_confinement", 1e-7 * radius, None);
    for class in &space.classes {
        for z in &class.points {
            tally.record(z.head_norm(), &z.to_reals());
        }
    }
    tally.notes.push(format!("{} classes of order {}", space.count(), space.order));
    tally.finish()
}

/// Bounds, peak, outer value and derivative consistency of `ρ`.
pub fn check_profile(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let rho = construction.profile();
    let mut tally = Tally::new("profile_invariants", 1e-8, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = p.r2();
    let h = 1e-5 * r2;
    let peak = p.peak_rate();
    if samples > 0 {
        tally.record((rho.slope(0.5 * r2) - peak).abs(), &[0.5 * r2]);
        tally.record(rho.value(0.0).abs(), &[0.0]);
    }
    for _ in 0..samples {
        let r = rng.gen_range(h..r2 - h);
        let s = rho.slope(r);
        let mut d = (p.delta - s).max(s - peak).max(0.0);
        if r <= r2 / 9.0 || r >= 8.0 * r2 / 9.0 {
            d = d.max((s - p.delta).abs());
        }
        let fd = (rho.value(r + h) - rho.value(r - h)) / (2.0 * h);
        tally.record(d.max((fd - s).abs()), &[r]);
    }
    tally.finish()
}

/// Range, plateaus and derivative consistency of `β`.
pub fn check_cutoff(construction: &Construction, samples: usize, seed: u64) -> CheckReport {
    let p = construction.params();
    let beta = construction.cutoff();
    let mut tally = Tally::new("cutoff_invariants", 1e-7, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = p.r2();
    let h = 1e-6 * r2;
    for _ in 0..samples {
        let ell = rng.gen_range(h..r2 - h);
        let (b, db) = beta.eval(ell);
        let mut d = (-b).max(b - 1.0).max(0.0);
        if (r2 / 3.0..=2.0 * r2 / 3.0).contains(&ell) {
            d = d.max((b - 1.0).abs());
        }
        if ell <= r2 / 9.0 || ell >= 8.0 * r2 / 9.0 {
            d = d.max(b.abs());
        }
        let fd = (beta.value(ell + h) - beta.value(ell - h)) / (2.0 * h);
        tally.record(d.max((fd - db).abs()), &[ell]);
    }
    tally.finish()
}

struct LinearProfile;

impl RadialProfile for LinearProfile {
    fn value(&self, r: f64) -> f64 {
        r
    }
    fn slope(&self, _: f64) -> f64 {
        1.0
    }
}

/// With `ρ(r) = r` and unit weights the radial flow is `z ↦ e^{2it}z`.
pub fn check_quadratic_convention(samples: usize, seed: u64) -> CheckReport {
    let mut tally = Tally::new("quadratic_convention", 1e-14, Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let z = sample_ball(&mut rng, 1, 1.0);
        let t = rng.gen_range(-5.0..5.0);
        let w = radial_flow(&LinearProfile, &z, t);
        let expected = Complex64::from_polar(1.0, 2.0 * t) * z.last();
        tally.record((w.last() - expected).norm(), &z.to_reals());
    }
    tally.finish()
}

/// The checks in their reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    SymplecticFlowH,
    SymplecticFlowF,
    SymplecticPhi,
    ModulusFlowH,
    ClosedFormFlowF,
    ConservationFlowF,
    FixedSetUnperturbed,
    CircleRotation,
    BoundaryRigidity,
    RotationStep,
    GcdLaw,
    PlaneConfinement,
    ProfileInvariants,
    CutoffInvariants,
    QuadraticConvention,
}

impl CheckKind {
    pub const ALL: [CheckKind; 15] = [
        CheckKind::SymplecticFlowH,
        CheckKind::SymplecticFlowF,
        CheckKind::SymplecticPhi,
        CheckKind::ModulusFlowH,
        CheckKind::ClosedFormFlowF,
        CheckKind::ConservationFlowF,
        CheckKind::FixedSetUnperturbed,
        CheckKind::CircleRotation,
        CheckKind::BoundaryRigidity,
        CheckKind::RotationStep,
        CheckKind::GcdLaw,
        CheckKind::PlaneConfinement,
        CheckKind::ProfileInvariants,
        CheckKind::CutoffInvariants,
        CheckKind::QuadraticConvention,
    ];

    fn default_samples(self) -> usize {
        match self {
            CheckKind::SymplecticFlowH | CheckKind::SymplecticFlowF | CheckKind::SymplecticPhi => 200,
            CheckKind::ModulusFlowH | CheckKind::RotationStep => 1000,
            CheckKind::ProfileInvariants | CheckKind::CutoffInvariants => 1000,
            CheckKind::ConservationFlowF => 400,
            _ => 100,
        }
    }

    fn needs_phi_cycles(self) -> bool {
        matches!(self, CheckKind::GcdLaw | CheckKind::PlaneConfinement)
    }

    fn needs_flow_h_points(self) -> bool {
        matches!(self, CheckKind::GcdLaw | CheckKind::FixedSetUnperturbed)
    }
}

/// Which checks to run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Full,
    /// Everything except the checks that need a fixed-point enumeration.
    Quick,
    Only(Vec<CheckKind>),
}

impl Suite {
    pub fn kinds(&self) -> Vec<CheckKind> {
        match self {
            Suite::Full => CheckKind::ALL.to_vec(),
            Suite::Quick => CheckKind::ALL
                .into_iter()
                .filter(|k| !k.needs_phi_cycles() && !k.needs_flow_h_points())
                .collect(),
            Suite::Only(kinds) => CheckKind::ALL.into_iter().filter(|k| kinds.contains(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Replaces every per-check sample count.
    pub samples: Option<usize>,
    /// Seed-grid resolution for the enumerations.
    pub grid_resolution: usize,
    pub fd_step: f64,
    pub perturbation: Perturbation,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 20240601, samples: None, grid_resolution: 12, fd_step: 1e-5, perturbation: Perturbation::Standard }
    }
}

/// Runs the selected checks; invalid parameters are rejected before any
/// check starts. Reports come back in [`CheckKind::ALL`] order and do not
/// depend on thread scheduling.
pub fn run_suite(params: &Params, suite: &Suite, opts: &SuiteOptions) -> Result<Vec<CheckReport>, ParamsError> {
    params.validate()?;
    let construction = Arc::new(Construction::with_perturbation(*params, opts.perturbation)?);
    let kinds = suite.kinds();
    let enumeration = EnumerationOptions::from_params(params, opts.grid_resolution);
    let phi = maps::phi(&construction);
    let flow_h = maps::flow_h(&construction, 1.0);
    let order = params.cycle_order();

    let (phi_cycles, flow_h_points) = rayon::join(
        || kinds.iter().any(|k| k.needs_phi_cycles()).then(|| cycle_space(phi.as_ref(), order, &enumeration)),
        || {
            kinds
                .iter()
                .any(|k| k.needs_flow_h_points())
                .then(|| enumerate_fixed_points(flow_h.as_ref(), order, &enumeration))
        },
    );

    let ctx = Context {
        construction: &construction,
        phi: &phi,
        flow_h: &flow_h,
        phi_cycles: phi_cycles.as_ref(),
        flow_h_points: flow_h_points.as_ref(),
        opts,
    };
    Ok(kinds.par_iter().flat_map_iter(|&k| ctx.run(k)).collect())
}

struct Context<'a> {
    construction: &'a Arc<Construction>,
    phi: &'a MapHandle,
    flow_h: &'a MapHandle,
    phi_cycles: Option<&'a CycleSpace>,
    flow_h_points: Option<&'a FixedPointSet>,
    opts: &'a SuiteOptions,
}

impl Context<'_> {
    fn run(&self, kind: CheckKind) -> Vec<CheckReport> {
        let c = self.construction.as_ref();
        let p = c.params();
        let samples = self.opts.samples.unwrap_or(kind.default_samples());
        let index = CheckKind::ALL.iter().position(|&k| k == kind).unwrap() as u64;
        let seed = self.opts.seed.wrapping_add(index);
        let h = self.opts.fd_step * p.radius;
        let tol = p.newton_tol;
        let report = match kind {
            CheckKind::SymplecticFlowH => check_symplectic("symplectic_flow_h", self.flow_h.as_ref(), samples, h, 1e-5, seed),
            CheckKind::SymplecticFlowF => {
                check_symplectic("symplectic_flow_f", maps::flow_f(self.construction, 1.0).as_ref(), samples, h, 1e-5, seed)
            }
            CheckKind::SymplecticPhi => check_symplectic("symplectic_phi", self.phi.as_ref(), samples, h, 1e-5, seed),
            CheckKind::ModulusFlowH => check_modulus_preservation(c, samples, seed),
            CheckKind::ClosedFormFlowF => check_closed_form(c, samples, seed),
            CheckKind::ConservationFlowF => check_conservation(c, samples, seed),
            CheckKind::FixedSetUnperturbed => check_fixed_set_unperturbed(self.flow_h_points.unwrap(), p.radius),
            CheckKind::CircleRotation => check_circle_rotation(c, samples, seed),
            CheckKind::BoundaryRigidity => check_boundary_rigidity(c, samples, seed),
            CheckKind::RotationStep => check_rotation_step(c, samples, seed),
            CheckKind::GcdLaw => {
                return vec![
                    check_gcd_law(self.phi.as_ref(), &self.phi_cycles.unwrap().fixed_points, tol),
                    check_gcd_law(self.flow_h.as_ref(), self.flow_h_points.unwrap(), tol),
                ]
            }
            CheckKind::PlaneConfinement => check_plane_confinement(self.phi_cycles.unwrap(), p.radius),
            CheckKind::ProfileInvariants => check_profile(c, samples, seed),
            CheckKind::CutoffInvariants => check_cutoff(c, samples, seed),
            CheckKind::QuadraticConvention => check_quadratic_convention(samples, seed),
        };
        vec![report]
    }
}

#[cfg(test)]
mod tests;
