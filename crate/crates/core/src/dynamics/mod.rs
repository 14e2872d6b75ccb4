//! Iteration, fixed points of iterates, minimal periods and the space of
//! primitive `k`-cycles modulo cyclic shift.

mod cycles;
mod enumerate;
mod newton;

use serde::{Deserialize, Serialize};

pub use cycles::{canonical_rotation, cycle_space, CycleClass, CycleSpace, CycleViolation};
pub use enumerate::{enumerate_fixed_points, seeds, EnumerationOptions, FixedPointSet, SeedFailure};
pub use newton::{newton_fixed_point, polish_fixed_point, NewtonOptions, NewtonOutcome};

use crate::maps::{MapError, SelfMap};
use crate::params::Params;
use crate::point::BallPoint;

/// A converged fixed point of `mapⁿ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub point: BallPoint,
    pub iterate_order: usize,
    pub residual: f64,
    pub minimal_period: usize,
    pub seed: BallPoint,
    pub newton_iterations: usize,
    /// Newton steps that had to drop a singular Jacobian direction.
    pub singular_steps: usize,
}

/// `mapⁿ(z)`, failing if an intermediate image leaves the closed ball.
pub fn iterate(map: &dyn SelfMap, z: &BallPoint, n: usize) -> Result<BallPoint, MapError> {
    let r2 = map.radius() * map.radius();
    let mut w = z.clone();
    for step in 0..n {
        w = map.apply(&w)?;
        if !(w.norm_sqr() <= r2) {
            return Err(MapError::Escape { steps: step + 1, point: w.to_reals() });
        }
    }
    Ok(w)
}

pub(crate) fn iterate_unchecked(map: &dyn SelfMap, z: &BallPoint, n: usize) -> Result<BallPoint, MapError> {
    let mut w = z.clone();
    for _ in 0..n {
        w = map.apply(&w)?;
    }
    Ok(w)
}

/// Smallest divisor `d` of `n` with `|map^d(z) − z| ≤ dedup_radius`.
pub fn minimal_period(map: &dyn SelfMap, z: &BallPoint, n: usize, params: &Params) -> usize {
    minimal_period_with(map, z, n, params.dedup_radius)
}

pub(crate) fn minimal_period_with(map: &dyn SelfMap, z: &BallPoint, n: usize, radius: f64) -> usize {
    let mut w = z.clone();
    for d in 1..=n {
        w = match map.apply(&w) {
            Ok(w) => w,
            Err(_) => return n,
        };
        if n % d == 0 && w.distance(z) <= radius {
            return d;
        }
    }
    n
}

#[cfg(test)]
mod tests;
