//! Points of the ball `B^{2N}(R) ⊂ ℂ^N` and action-angle coordinates on
//! the last complex coordinate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::TAU;

/// A point `z = (z_1, …, z_N)` stored as `N` complex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub coords: Vec<Complex64>,
}

impl BallPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        BallPoint { coords }
    }

    pub fn origin(n: usize) -> Self {
        BallPoint { coords: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Builds a point from `2N` interleaved reals `x1, y1, …, xN, yN`.
    pub fn from_reals(reals: &[f64]) -> Self {
        debug_assert!(reals.len() % 2 == 0);
        BallPoint {
            coords: reals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        }
    }

    /// Interleaved real coordinates `x1, y1, …, xN, yN`.
    pub fn to_reals(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn in_ball(&self, radius: f64) -> bool {
        self.norm_sqr() < radius * radius
    }

    pub fn distance(&self, other: &BallPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest modulus among the head coordinates `z_1, …, z_{N−1}`.
    pub fn head_norm(&self) -> f64 {
        let n = self.coords.len();
        self.coords[..n.saturating_sub(1)]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> Complex64 {
        *self.coords.last().expect("points have at least one coordinate")
    }

    pub fn to_polar(&self) -> PolarLast {
        PolarLast::from_point(self)
    }
}

/// Coordinates `(z_1, …, z_{N−1}, ℓ, θ)` with `z_N = √ℓ·e^{iθ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarLast {
    pub head: Vec<Complex64>,
    pub ell: f64,
    pub theta: f64,
}

impl PolarLast {
    pub fn from_point(z: &BallPoint) -> Self {
        let (head, last) = z.coords.split_at(z.coords.len() - 1);
        let last = last[0];
        let ell = last.norm_sqr();
        let theta = if ell == 0.0 { 0.0 } else { wrap_angle(last.arg()) };
        PolarLast { head: head.to_vec(), ell, theta }
    }

    pub fn to_point(&self) -> BallPoint {
        let mut coords = self.head.clone();
        coords.push(Complex64::from_polar(self.ell.max(0.0).sqrt(), self.theta));
        BallPoint { coords }
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Lexicographic order on flattened real coordinates in which coordinates
/// closer than `tie_tol` compare equal.
pub fn fuzzy_lex_cmp(a: &[f64], b: &[f64], tie_tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tie_tol {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    a.len().cmp(&b.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polar_at_origin_declares_zero_angle() {
        let z = BallPoint::origin(2);
        let p = z.to_polar();
        assert_eq!(p.ell, 0.0);
        assert_eq!(p.theta, 0.0);
        assert_eq!(p.to_point(), z);
    }

    #[test]
    fn reals_are_interleaved() {
        let z = BallPoint::new(vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)]);
        assert_eq!(z.to_reals(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(BallPoint::from_reals(&[1.0, 2.0, 3.0, 4.0]), z);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(-0.0), 0.0);
        assert!((wrap_angle(-1.0) - (TAU - 1.0)).abs() < 1e-15);
        assert!(wrap_angle(-1e-20) < TAU);
    }

    proptest! {
        #[test]
        fn polar_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, hx in -0.5f64..0.5) {
            prop_assume!(x * x + y * y > 1e-12);
            let z = BallPoint::new(vec![Complex64::new(hx, 0.1), Complex64::new(x, y)]);
            let p = z.to_polar();
            prop_assert!(p.theta >= 0.0 && p.theta < TAU);
            prop_assert!(p.to_point().distance(&z) < 1e-14);
        }
    }
}
