//! Smooth cut-off `β` localising the perturbation to an annulus.

use crate::params::Params;

/// `s(x) = g(x)/(g(x) + g(1 − x))`, `g(x) = e^{−1/x}`, with derivative.
fn transition(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let exponent = 1.0 / x - 1.0 / (1.0 - x);
    if exponent > 700.0 {
        return (0.0, 0.0);
    }
    if exponent < -700.0 {
        return (1.0, 0.0);
    }
    let e = exponent.exp();
    let s = 1.0 / (1.0 + e);
    let one_minus = e / (1.0 + e);
    let ds = s * one_minus * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)));
    (s, ds)
}

/// `β` with plateaus `β = 1` on `[R²/3, 2R²/3]` and `β = 0` outside
/// `(R²/9, 8R²/9)`.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    rise_start: f64,
    rise_end: f64,
    fall_start: f64,
    fall_end: f64,
}

impl Cutoff {
    pub fn new(params: &Params) -> Self {
        let r2 = params.r2();
        Cutoff {
            rise_start: r2 / 9.0,
            rise_end: r2 / 3.0,
            fall_start: 2.0 * r2 / 3.0,
            fall_end: 8.0 * r2 / 9.0,
        }
    }

    /// Returns `(β(ℓ), β′(ℓ))`.
    pub fn eval(&self, ell: f64) -> (f64, f64) {
        if ell <= self.rise_start || ell >= self.fall_end {
            (0.0, 0.0)
        } else if ell < self.rise_end {
            let width = self.rise_end - self.rise_start;
            let (s, ds) = transition((ell - self.rise_start) / width);
            (s, ds / width)
        } else if ell <= self.fall_start {
            (1.0, 0.0)
        } else {
            let width = self.fall_end - self.fall_start;
            let (s, ds) = transition((self.fall_end - ell) / width);
            (s, -ds / width)
        }
    }

    pub fn value(&self, ell: f64) -> f64 {
        self.eval(ell).0
    }

    pub fn slope(&self, ell: f64) -> f64 {
        self.eval(ell).1
    }

    /// True where `β ≡ 1`.
    pub fn in_plateau(&self, ell: f64) -> bool {
        ell >= self.rise_end && ell <= self.fall_start
    }

    /// True where `β ≡ 0`.
    pub fn vanishes(&self, ell: f64) -> bool {
        ell <= self.rise_start || ell >= self.fall_end
    }
}

pub fn make_beta(params: &Params) -> Result<Cutoff, crate::params::ParamsError> {
    params.validate()?;
    Ok(Cutoff::new(params))
}
