//! The radial profile `ρ` whose slope sets the rotation rate of the
//! unperturbed flow.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

use crate::params::Params;

/// A radial Hamiltonian profile `r ↦ ρ(r)` on `[0, R²]`.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn slope(&self, r: f64) -> f64;
}

/// Standard compactly supported bump with `b(0) = 1`, support `(-1, 1)`,
/// returned together with its derivative.
fn bump(u: f64) -> (f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - u * u;
    let b = (1.0 - 1.0 / q).exp();
    (b, b * (-2.0 * u / (q * q)))
}

const QUADRATURE_PANELS: usize = 16;

/// `ρ′(r) = δ + (π/(2k) − δ)·b((r − R²/2)/w)` with `w = 7R²/18`.
///
/// The bump is supported in `[R²/9, 8R²/9]`, so the slope equals `δ` on the
/// outer band and peaks at `π/(2k)` exactly at `r = R²/2`.
pub struct Profile {
    center: f64,
    half_width: f64,
    floor: f64,
    peak: f64,
    quadrature: GaussLegendre,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("center", &self.center)
            .field("half_width", &self.half_width)
            .field("floor", &self.floor)
            .field("peak", &self.peak)
            .finish()
    }
}

impl Profile {
    /// Caller is responsible for `params.validate()`.
    pub fn new(params: &Params) -> Self {
        let r2 = params.r2();
        Profile {
            center: 0.5 * r2,
            half_width: 7.0 * r2 / 18.0,
            floor: params.delta,
            peak: params.peak_rate(),
            quadrature: GaussLegendre::new(NonZeroUsize::new(20).unwrap()),
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// `ρ″(r)`.
    pub fn curvature(&self, r: f64) -> f64 {
        let (_, db) = bump((r - self.center) / self.half_width);
        (self.peak - self.floor) * db / self.half_width
    }

    fn bump_integral(&self, upper: f64) -> f64 {
        let hi = upper.clamp(-1.0, 1.0);
        if hi <= -1.0 {
            return 0.0;
        }
        let width = (hi + 1.0) / QUADRATURE_PANELS as f64;
        (0..QUADRATURE_PANELS)
            .map(|i| {
                let a = -1.0 + i as f64 * width;
                self.quadrature.integrate(a, a + width, |u| bump(u).0)
            })
            .sum()
    }
}

impl RadialProfile for Profile {
    /// `ρ(r) = ∫₀^r ρ′`, normalised so that `ρ(0) = 0`.
    fn value(&self, r: f64) -> f64 {
        let u = (r - self.center) / self.half_width;
        self.floor * r + (self.peak - self.floor) * self.half_width * self.bump_integral(u)
    }

    fn slope(&self, r: f64) -> f64 {
        let (b, _) = bump((r - self.center) / self.half_width);
        self.floor + (self.peak - self.floor) * b
    }
}

/// Builds the radial profile for `params`.
pub fn make_rho(params: &Params) -> Result<Profile, crate::params::ParamsError> {
    params.validate()?;
    Ok(Profile::new(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn defaults() -> Profile {
        make_rho(&Params::default()).unwrap()
    }

    #[test]
    fn peak_at_half_r_squared() {
        assert_eq!(defaults().slope(0.5), PI / 6.0);
    }

    #[test]
    fn floor_on_outer_band() {
        let p = defaults();
        assert_eq!(p.slope(0.95), PI / 60.0);
        assert_eq!(p.slope(8.0 / 9.0), PI / 60.0);
        assert_eq!(p.slope(1.0), PI / 60.0);
    }

    #[test]
    fn slope_bounds_on_dense_sample() {
        let params = Params::default();
        let p = defaults();
        let mut min = f64::INFINITY;
        for i in 0..=10_000 {
            let r = i as f64 / 10_000.0;
            let s = p.slope(r);
            min = min.min(s);
            assert!(s <= params.peak_rate());
            if (r - 0.5).abs() > 1e-4 {
                assert!(s < params.peak_rate() - params.newton_tol, "r = {r}");
            }
        }
        assert!(min > 0.0);
    }

    #[test]
    fn rejects_unsatisfiable_delta() {
        let params = Params { delta: PI / 5.0, ..Params::default() };
        assert!(make_rho(&params).is_err());
    }

    #[test]
    fn value_matches_trapezoid_integral_of_slope() {
        let p = defaults();
        let n = 200_000;
        for &r in &[0.05, 0.3, 0.5, 0.77, 1.0] {
            let h = r / n as f64;
            let mut acc = 0.5 * (p.slope(0.0) + p.slope(r));
            for i in 1..n {
                acc += p.slope(i as f64 * h);
            }
            assert!((p.value(r) - acc * h).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn curvature_matches_finite_difference() {
        let p = defaults();
        for &r in &[0.2, 0.4, 0.5, 0.61, 0.85] {
            let h = 1e-6;
            let fd = (p.slope(r + h) - p.slope(r - h)) / (2.0 * h);
            assert!((p.curvature(r) - fd).abs() < 1e-6);
        }
        assert_eq!(p.curvature(0.5), 0.0);
    }
}
