//! Shared fixtures for the benchmarks in `benches/`.

use hamroot_core::{BallPoint, Construction, Params, PolarLast};
use num_complex::Complex64;
use std::sync::Arc;

pub fn default_construction() -> Arc<Construction> {
    Arc::new(Construction::new(Params::default()).expect("default parameters are valid"))
}

/// A point on the invariant plane with action `ell` and angle `theta`.
pub fn plane_point(ell: f64, theta: f64) -> BallPoint {
    PolarLast { head: vec![Complex64::new(0.0, 0.0)], ell, theta }.to_point()
}

/// Evaluation sites: outer band, cut-off plateau and transition zone.
pub fn sites() -> [(&'static str, BallPoint); 3] {
    [
        ("outer", plane_point(0.95, 0.3)),
        ("plateau", plane_point(0.5, 0.3)),
        ("transition", plane_point(0.25, 0.3)),
    ]
}
