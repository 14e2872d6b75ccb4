//! Fixed-step implicit midpoint rule for planar autonomous systems.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("implicit stage did not converge at step {step} (state {state:?}, step size {h})")]
    StageDivergence { step: usize, state: [f64; 2], h: f64 },
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
}

const MAX_STAGE_ITERATIONS: usize = 80;

/// Implicit midpoint with a fixed nominal step.
///
/// The integration interval is split into `ceil(|t|/step)` equal steps, so
/// the effective step never exceeds the nominal one. The implicit stage is
/// solved by fixed-point iteration down to rounding level.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitMidpoint {
    pub step: f64,
}

impl ImplicitMidpoint {
    pub fn new(step: f64) -> Self {
        ImplicitMidpoint { step }
    }

    pub fn integrate<F>(&self, field: F, start: [f64; 2], t: f64) -> Result<[f64; 2], IntegratorError>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        if t == 0.0 {
            return Ok(start);
        }
        let steps = (t.abs() / self.step).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let mut y = start;
        let mut slope = field(start);
        for step in 0..steps {
            (y, slope) = Self::advance(&field, y, slope, h).ok_or(IntegratorError::StageDivergence {
                step,
                state: y,
                h,
            })?;
            if !(y[0].is_finite() && y[1].is_finite()) {
                return Err(IntegratorError::NonFinite { step });
            }
        }
        Ok(y)
    }

    /// One step from `y0`; `guess` is the predicted midpoint slope. Returns
    /// the new state and the converged midpoint slope.
    fn advance<F>(field: &F, y0: [f64; 2], guess: [f64; 2], h: f64) -> Option<([f64; 2], [f64; 2])>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        let mut y1 = [y0[0] + h * guess[0], y0[1] + h * guess[1]];
        for _ in 0..MAX_STAGE_ITERATIONS {
            let mid = [0.5 * (y0[0] + y1[0]), 0.5 * (y0[1] + y1[1])];
            let f = field(mid);
            let next = [y0[0] + h * f[0], y0[1] + h * f[1]];
            let change = (next[0] - y1[0]).abs().max((next[1] - y1[1]).abs());
            let scale = 1.0 + next[0].abs().max(next[1].abs());
            y1 = next;
            if change <= 4.0 * f64::EPSILON * scale {
                return Some((y1, f));
            }
        }
        None
    }

    /// Integrates at the nominal step and at half of it; returns the
    /// half-step result and the Richardson error estimate `|y_{h/2} − y_h|/3`.
    pub fn integrate_with_estimate<F>(
        &self,
        field: F,
        start: [f64; 2],
        t: f64,
    ) -> Result<([f64; 2], f64), IntegratorError>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        let coarse = self.integrate(&field, start, t)?;
        let fine = ImplicitMidpoint::new(0.5 * self.step).integrate(&field, start, t)?;
        let err = (fine[0] - coarse[0]).hypot(fine[1] - coarse[1]) / 3.0;
        Ok((fine, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_conserves_quadratic_energy() {
        // implicit midpoint preserves quadratic invariants exactly
        let im = ImplicitMidpoint::new(0.05);
        let y = im.integrate(|[q, p]| [p, -q], [1.0, 0.0], 10.0).unwrap();
        assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-13);
        let exact = [10.0f64.cos(), -10.0f64.sin()];
        assert!((y[0] - exact[0]).abs() < 0.05 && (y[1] - exact[1]).abs() < 0.05);
    }

    #[test]
    fn second_order_convergence() {
        let field = |[q, p]: [f64; 2]| [p, -q.sin()];
        let reference = ImplicitMidpoint::new(1e-4).integrate(field, [1.0, 0.0], 2.0).unwrap();
        let err = |h: f64| {
            let y = ImplicitMidpoint::new(h).integrate(field, [1.0, 0.0], 2.0).unwrap();
            (y[0] - reference[0]).hypot(y[1] - reference[1])
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn constant_field_is_exact_for_any_step() {
        let y = ImplicitMidpoint::new(0.7).integrate(|_| [0.25, 0.0], [0.1, 2.0], 1.0).unwrap();
        assert!((y[0] - 0.35).abs() < 1e-16);
        assert_eq!(y[1], 2.0);
    }

    #[test]
    fn richardson_estimate_tracks_true_error() {
        let field = |[q, p]: [f64; 2]| [p, -q.sin()];
        let reference = ImplicitMidpoint::new(1e-4).integrate(field, [1.0, 0.0], 2.0).unwrap();
        let (y, est) = ImplicitMidpoint::new(0.02).integrate_with_estimate(field, [1.0, 0.0], 2.0).unwrap();
        let actual = (y[0] - reference[0]).hypot(y[1] - reference[1]);
        assert!(est > 0.5 * actual && est < 2.0 * actual, "{est} vs {actual}");
    }
}
