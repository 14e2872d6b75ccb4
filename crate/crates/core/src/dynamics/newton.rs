//! Damped Newton iteration for fixed points of an iterate `map^n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{iterate, iterate_unchecked, FixedPointRecord};
use crate::maps::{MapError, SelfMap};
use crate::params::Params;
use crate::point::BallPoint;

/// Stopping rules and step controls for [`newton_fixed_point`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonOptions {
    /// Residual `|mapⁿ(z) − z|` required for convergence.
    pub tol: f64,
    /// Correction length below which an iterate with residual `≤ tol` is final.
    pub step_tol: f64,
    /// Seed residual accepted without any step.
    pub floor: f64,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Singular values below `rank_cutoff·σ_max` are dropped from the solve.
    pub rank_cutoff: f64,
    /// Rounding level of the equations relative to `R`; solve components
    /// whose projected residual is below it are dropped.
    pub residual_noise: f64,
    /// Radius used for minimal-period detection and deduplication.
    pub dedup_radius: f64,
    /// Coordinates with `|z_ν| ≥ log_threshold·R` enter the equations in
    /// logarithmic form.
    pub log_threshold: f64,
    /// A run stops once its equation norm has fallen by less than
    /// `stall_ratio` over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_ratio: f64,
    /// Maximum steps of [`polish_fixed_point`]; `0` disables polishing.
    pub polish_sweeps: usize,
    /// Difference step of the polishing, relative to `R`.
    pub polish_scale: f64,
}

impl NewtonOptions {
    pub fn from_params(params: &Params) -> Self {
        NewtonOptions {
            tol: params.newton_tol,
            step_tol: 1e-3 * params.dedup_radius,
            floor: 1e-3 * params.newton_tol,
            fd_step: 1e-6 * params.radius,
            max_iterations: 50,
            max_halvings: 30,
            rank_cutoff: 1e-13,
            residual_noise: 8.0 * f64::EPSILON,
            dedup_radius: params.dedup_radius,
            log_threshold: 1e-2,
            stall_window: 4,
            stall_ratio: 0.5,
            polish_sweeps: 8,
            polish_scale: 1e-5,
        }
    }
}

/// Result of one Newton run.
#[derive(Debug, Clone)]
pub enum NewtonOutcome {
    Converged(FixedPointRecord),
    NoConvergence { last: BallPoint, residual: f64, iterations: usize },
    SingularJacobian { last: BallPoint, residual: f64, iterations: usize },
    MapFailure { error: MapError, iterations: usize },
}

impl NewtonOutcome {
    pub fn converged(&self) -> Option<&FixedPointRecord> {
        match self {
            NewtonOutcome::Converged(r) => Some(r),
            _ => None,
        }
    }
}

fn cartesian_residual(map: &dyn SelfMap, n: usize, x: &[f64], checked: bool) -> Result<Vec<f64>, MapError> {
    let z = BallPoint::from_reals(x);
    let image = if checked { iterate(map, &z, n)? } else { iterate_unchecked(map, &z, n)? };
    Ok(image.to_reals().iter().zip(x).map(|(a, b)| a - b).collect())
}

/// Equation form used by the solver: per complex coordinate, `|z|·ln(w/z)`
/// where `|z| ≥ threshold` and `w − z` elsewhere, with `w = mapⁿ(z)`. Both
/// vanish exactly at fixed points.
#[derive(Debug, Clone)]
struct Equations {
    log_form: Vec<bool>,
}

impl Equations {
    fn at(x: &[f64], threshold: f64) -> Self {
        Equations { log_form: x.chunks_exact(2).map(|c| c[0].hypot(c[1]) >= threshold).collect() }
    }

    fn transform(&self, x: &[f64], cart: &[f64]) -> Vec<f64> {
        let mut out = cart.to_vec();
        for (nu, &log) in self.log_form.iter().enumerate() {
            if !log {
                continue;
            }
            let z = Complex64::new(x[2 * nu], x[2 * nu + 1]);
            let w = z + Complex64::new(cart[2 * nu], cart[2 * nu + 1]);
            let ratio = w / z;
            if ratio.norm() > 1e-3 && ratio.is_finite() {
                let e = ratio.ln() * z.norm();
                out[2 * nu] = e.re;
                out[2 * nu + 1] = e.im;
            }
        }
        out
    }

    fn eval(&self, map: &dyn SelfMap, n: usize, x: &[f64], checked: bool) -> Result<(Vec<f64>, Vec<f64>), MapError> {
        let cart = cartesian_residual(map, n, x, checked)?;
        Ok((self.transform(x, &cart), cart))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_jacobian(eqs: &Equations, map: &dyn SelfMap, n: usize, x: &[f64], h: f64) -> Result<DMatrix<f64>, MapError> {
    let dim = x.len();
    let mut jac = DMatrix::zeros(dim, dim);
    let mut probe = x.to_vec();
    for j in 0..dim {
        probe[j] = x[j] + h;
        let (plus, _) = eqs.eval(map, n, &probe, false)?;
        probe[j] = x[j] - h;
        let (minus, _) = eqs.eval(map, n, &probe, false)?;
        probe[j] = x[j];
        for i in 0..dim {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solves `J·δ = −g` through the SVD; returns the step and whether any
/// singular direction had to be dropped. Components whose share of `g` is
/// at most `noise` are left out as well. `None` means `J` vanishes.
fn newton_direction(jac: DMatrix<f64>, g: &[f64], rank_cutoff: f64, noise: f64) -> Option<(DVector<f64>, bool)> {
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return None;
    }
    let cutoff = rank_cutoff * smax;
    let truncated = svd.singular_values.iter().any(|&s| s <= cutoff);
    let (u, vt) = (svd.u.as_ref()?, svd.v_t.as_ref()?);
    let rhs = -DVector::from_column_slice(g);
    let utb = u.transpose() * rhs;
    let scaled = DVector::from_iterator(
        utb.len(),
        utb.iter().zip(svd.singular_values.iter()).map(|(b, &s)| if s > cutoff && b.abs() > noise { b / s } else { 0.0 }),
    );
    Some((vt.transpose() * scaled, truncated))
}

/// Searches for a fixed point of `mapⁿ` from `seed`.
///
/// Steps are halved (up to `max_halvings` times) until the equation norm
/// strictly decreases and the trial point stays in the ball. At degenerate
/// fixed points (where `D mapⁿ − I` vanishes) Newton steps shrink by about
/// half per iteration; once two consecutive steps show that ratio, the doubled
/// step is tried as well. Once the residual is `≤ tol` the run stops as soon
/// as the next correction is `≤ step_tol` or longer than the previous one
/// (the residual has reached rounding level). A seed whose residual is
/// already `≤ floor` is returned unchanged.
pub fn newton_fixed_point(
    map: &dyn SelfMap,
    n: usize,
    seed: &BallPoint,
    opts: &NewtonOptions,
) -> NewtonOutcome {
    let radius = map.radius();
    let threshold = opts.log_threshold * radius;
    let mut x = seed.to_reals();
    let mut cart = match cartesian_residual(map, n, &x, true) {
        Ok(g) => g,
        Err(error) => return NewtonOutcome::MapFailure { error, iterations: 0 },
    };
    let mut r = norm(&cart);
    let mut singular_steps = 0;
    let mut last_full = f64::INFINITY;
    let mut history: Vec<f64> = Vec::new();

    let finish = |x: &[f64], r: f64, iterations: usize, singular_steps: usize| {
        let point = BallPoint::from_reals(x);
        let minimal_period = super::minimal_period_with(map, &point, n, opts.dedup_radius);
        NewtonOutcome::Converged(FixedPointRecord {
            point,
            iterate_order: n,
            residual: r,
            minimal_period,
            seed: seed.clone(),
            newton_iterations: iterations,
            singular_steps,
        })
    };
    let stop = |x: &[f64], r: f64, iterations: usize| NewtonOutcome::NoConvergence {
        last: BallPoint::from_reals(x),
        residual: r,
        iterations,
    };

    for it in 0..opts.max_iterations {
        if it == 0 && r <= opts.floor {
            return finish(&x, r, 0, singular_steps);
        }
        let eqs = Equations::at(&x, threshold);
        let g = eqs.transform(&x, &cart);
        let merit = norm(&g);
        history.push(merit);
        if it >= opts.stall_window && r > opts.tol {
            let past = history[it - opts.stall_window];
            if merit > opts.stall_ratio * past {
                return stop(&x, r, it);
            }
        }
        let jac = match fd_jacobian(&eqs, map, n, &x, opts.fd_step) {
            Ok(j) => j,
            Err(error) => return NewtonOutcome::MapFailure { error, iterations: it },
        };
        let Some((delta, truncated)) = newton_direction(jac, &g, opts.rank_cutoff, opts.residual_noise * radius) else {
            if r <= opts.tol {
                return finish(&x, r, it, singular_steps);
            }
            return NewtonOutcome::SingularJacobian { last: BallPoint::from_reals(&x), residual: r, iterations: it };
        };
        if truncated {
            singular_steps += 1;
        }
        let full = delta.norm();
        if r <= opts.tol && (full <= opts.step_tol || full > last_full) {
            return finish(&x, r, it, singular_steps);
        }

        let try_step = |alpha: f64| -> Option<(Vec<f64>, Vec<f64>, f64)> {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
            if !BallPoint::from_reals(&trial).in_ball(radius) {
                return None;
            }
            let (gt, ct) = eqs.eval(map, n, &trial, true).ok()?;
            let mt = norm(&gt);
            (mt < merit).then_some((trial, ct, mt))
        };

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..=opts.max_halvings {
            if let Some(t) = try_step(alpha) {
                accepted = Some((t, alpha));
                break;
            }
            alpha *= 0.5;
        }
        if alpha == 1.0 && (0.35..=0.65).contains(&(full / last_full)) {
            if let (Some(((_, _, m1), _)), Some(t2)) = (&accepted, try_step(2.0)) {
                if t2.2 < *m1 {
                    accepted = Some((t2, 2.0));
                }
            }
        }

        let Some(((trial, ct, _), _)) = accepted else {
            if r <= opts.tol {
                return finish(&x, r, it + 1, singular_steps);
            }
            return stop(&x, r, it + 1);
        };
        last_full = full;
        x = trial;
        cart = ct;
        r = norm(&cart);
    }
    if r <= opts.tol {
        return finish(&x, r, opts.max_iterations, singular_steps);
    }
    stop(&x, r, opts.max_iterations)
}

/// Refines a converged fixed point by Newton steps on the residual norm
/// `f(z) = |mapⁿ(z) − z|`, with gradient and Hessian from central
/// differences at step `polish_scale·R`.
///
/// At degenerate fixed points the residual of a Newton iterate can reach
/// rounding level while the point is still well off the true fixed point
/// along the soft direction. There `f` behaves like a positive definite
/// quadratic form in the offset, and its minimiser is the fixed point.
/// Only Hessian directions of positive curvature are used and a step is
/// kept only if it lowers `f`, so the residual never increases.
pub fn polish_fixed_point(
    map: &dyn SelfMap,
    rec: &FixedPointRecord,
    opts: &NewtonOptions,
) -> FixedPointRecord {
    let n = rec.iterate_order;
    let radius = map.radius();
    let merit = |x: &[f64]| -> f64 {
        if !BallPoint::from_reals(x).in_ball(radius) {
            return f64::INFINITY;
        }
        cartesian_residual(map, n, x, true).map(|g| norm(&g)).unwrap_or(f64::INFINITY)
    };
    let mut x = rec.point.to_reals();
    let mut f = merit(&x);
    let h = opts.polish_scale * radius;
    let dim = x.len();

    for _ in 0..opts.polish_sweeps {
        if !(f > 0.0 && f.is_finite()) {
            break;
        }
        let shifted = |moves: &[(usize, f64)]| -> f64 {
            let mut y = x.clone();
            for &(i, d) in moves {
                y[i] += d;
            }
            merit(&y)
        };
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (p, m) = (shifted(&[(i, h)]), shifted(&[(i, -h)]));
            grad[i] = (p - m) / (2.0 * h);
            hess[(i, i)] = (p - 2.0 * f + m) / (h * h);
            for j in 0..i {
                let pp = shifted(&[(i, h), (j, h)]);
                let pm = shifted(&[(i, h), (j, -h)]);
                let mp = shifted(&[(i, -h), (j, h)]);
                let mm = shifted(&[(i, -h), (j, -h)]);
                let v = (pp - pm - mp + mm) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        if !(grad.iter().all(|v| v.is_finite()) && hess.iter().all(|v| v.is_finite())) {
            break;
        }
        let eig = hess.symmetric_eigen();
        let top = eig.eigenvalues.max();
        if !(top > 0.0) {
            break;
        }
        let mut step = DVector::zeros(dim);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > opts.rank_cutoff * top {
                let v = eig.eigenvectors.column(k);
                step -= v * (v.dot(&grad) / lambda);
            }
        }
        let mut alpha = 1.0;
        let mut improved = None;
        for _ in 0..8 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + alpha * d).collect();
            let ft = merit(&trial);
            if ft < f {
                improved = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, ft)) = improved else { break };
        let moved = alpha * step.norm();
        let gain = f - ft;
        x = trial;
        f = ft;
        if moved <= opts.step_tol * 1e-3 || gain <= 1e-3 * f {
            break;
        }
    }
    let point = BallPoint::from_reals(&x);
    FixedPointRecord {
        minimal_period: super::minimal_period_with(map, &point, n, opts.dedup_radius),
        point,
        residual: f,
        ..rec.clone()
    }
}
