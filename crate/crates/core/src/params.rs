//! Construction constants for one map instance.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Violations of the [`Params`] invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("dimension N must be at least 1 (got {0})")]
    Dimension(usize),
    #[error("radius R must be positive and finite (got {0})")]
    Radius(f64),
    #[error("cycle order k must be at least 1 (got {0})")]
    CycleOrder(u32),
    #[error("delta must satisfy 0 < delta < pi/(2k) = {bound} (got {delta})")]
    Delta { delta: f64, bound: f64 },
    #[error("epsilon must satisfy 0 < epsilon < epsilon_max = {bound} (got {epsilon})")]
    Epsilon { epsilon: f64, bound: f64 },
    #[error("{name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("integrator_step must not exceed 1 (got {0})")]
    StepTooLarge(f64),
}

/// All constants of a map instance.
///
/// `n` is the complex dimension, `radius` the ball radius and `k` the cycle
/// order, so the map under study has a distinguished `2k`-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub radius: f64,
    pub k: u32,
    pub delta: f64,
    pub epsilon: f64,
    pub integrator_step: f64,
    pub newton_tol: f64,
    pub dedup_radius: f64,
}

impl Default for Params {
    fn default() -> Self {
        let radius = 1.0;
        let k = 3;
        Params {
            n: 2,
            radius,
            k,
            delta: PI / 60.0,
            epsilon: 0.5 * epsilon_max(radius, k),
            integrator_step: 1e-3,
            newton_tol: 1e-10 * radius,
            dedup_radius: 1e-5 * radius,
        }
    }
}

/// Upper bound on the perturbation strength: `min(7R⁴/(324k²), R²/(36k²))`.
///
/// The second term keeps the total action drift over `2k` unit steps
/// (at most `4εk²`) inside the `R²/9` margin between the annuli.
pub fn epsilon_max(radius: f64, k: u32) -> f64 {
    let r2 = radius * radius;
    let k2 = f64::from(k) * f64::from(k);
    (7.0 * r2 * r2 / (324.0 * k2)).min(r2 / (36.0 * k2))
}

impl Params {
    /// Default parameters with a different cycle order; `epsilon` is kept
    /// unless it would violate the bound for the new `k`.
    pub fn with_k(k: u32) -> Self {
        let mut p = Params { k, ..Params::default() };
        if k >= 1 && p.epsilon >= epsilon_max(p.radius, k) {
            p.epsilon = 0.5 * epsilon_max(p.radius, k);
        }
        p
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.n < 1 {
            return Err(ParamsError::Dimension(self.n));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(ParamsError::Radius(self.radius));
        }
        if self.k < 1 {
            return Err(ParamsError::CycleOrder(self.k));
        }
        let bound = self.peak_rate();
        if !(self.delta > 0.0 && self.delta < bound) {
            return Err(ParamsError::Delta { delta: self.delta, bound });
        }
        let bound = self.epsilon_max();
        if !(self.epsilon > 0.0 && self.epsilon < bound) {
            return Err(ParamsError::Epsilon { epsilon: self.epsilon, bound });
        }
        for (name, value) in [
            ("integrator_step", self.integrator_step),
            ("newton_tol", self.newton_tol),
            ("dedup_radius", self.dedup_radius),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        if self.integrator_step > 1.0 {
            return Err(ParamsError::StepTooLarge(self.integrator_step));
        }
        Ok(())
    }

    /// `π/(2k)`, the maximal slope of the radial profile.
    pub fn peak_rate(&self) -> f64 {
        PI / (2.0 * f64::from(self.k))
    }

    pub fn epsilon_max(&self) -> f64 {
        epsilon_max(self.radius, self.k)
    }

    pub fn r2(&self) -> f64 {
        self.radius * self.radius
    }

    /// Length of the distinguished cycle, `2k`.
    pub fn cycle_order(&self) -> usize {
        2 * self.k as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = Params::default();
        p.validate().unwrap();
        assert!((p.epsilon - 0.5 * (7.0f64 / 2916.0).min(1.0 / 324.0)).abs() < 1e-15);
        assert!((p.epsilon - 0.0012).abs() < 1e-5);
    }

    #[test]
    fn epsilon_bound_takes_smaller_term() {
        assert_eq!(epsilon_max(1.0, 3), 7.0 / 2916.0);
        // for small balls the quartic term dominates less
        let r: f64 = 2.0;
        assert_eq!(epsilon_max(r, 1), (7.0 * 16.0 / 324.0f64).min(4.0 / 36.0));
    }

    #[test]
    fn rejects_bad_delta() {
        let p = Params { delta: PI / 4.0, ..Params::default() };
        assert!(matches!(p.validate(), Err(ParamsError::Delta { .. })));
        let p = Params { delta: PI / 6.0, ..Params::default() };
        assert!(matches!(p.validate(), Err(ParamsError::Delta { .. })));
    }

    #[test]
    fn rejects_bad_epsilon_with_bound_in_message() {
        let p = Params { epsilon: 0.01, ..Params::default() };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains(&format!("{}", 7.0 / 2916.0)));
    }

    #[test]
    fn rejects_zero_k_and_n() {
        assert!(matches!(
            Params { k: 0, ..Params::default() }.validate(),
            Err(ParamsError::CycleOrder(0))
        ));
        assert!(matches!(
            Params { n: 0, ..Params::default() }.validate(),
            Err(ParamsError::Dimension(0))
        ));
    }

    #[test]
    fn with_k_stays_valid() {
        for k in 1..8 {
            Params::with_k(k).validate().unwrap();
        }
    }
}
