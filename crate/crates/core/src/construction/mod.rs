//! The perturbed radial map `Φ = φ_H ∘ φ_{εF}` on `B^{2N}(R)`.
//!
//! `H(z) = ρ(Σ ζ(ν)|z_ν|²)` generates a rotation of each coordinate at a
//! rate depending only on the weighted action, and `F(z) = β(|z_N|²)·cos(mθ)`
//! breaks the circle of `2k`-periodic points of `φ_H` down to its critical
//! points. `m = k` for the standard map and `m = 2k` for the control variant.
//!
//! Composition is right to left: `Φ(z) = φ_H(φ_{εF}(z))`, the perturbation
//! flow acts first.

pub mod cutoff;
pub mod integrator;
pub mod profile;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cutoff::{make_beta, Cutoff};
pub use integrator::{ImplicitMidpoint, IntegratorError};
pub use profile::{make_rho, Profile, RadialProfile};

use crate::params::{Params, ParamsError};
use crate::point::{wrap_angle, BallPoint, PolarLast};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("perturbation flow failed at {point:?}: {source}")]
    Integrator {
        point: Vec<f64>,
        #[source]
        source: IntegratorError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("coordinate index {nu} outside 1..={n}")]
pub struct IndexError {
    pub nu: usize,
    pub n: usize,
}

/// Coordinate weight: `1` for the last coordinate, `9/10` for the others.
pub fn zeta(nu: usize, n: usize) -> Result<f64, IndexError> {
    if nu < 1 || nu > n {
        return Err(IndexError { nu, n });
    }
    Ok(if nu == n { 1.0 } else { 0.9 })
}

fn weight(index0: usize, n: usize) -> f64 {
    if index0 + 1 == n {
        1.0
    } else {
        0.9
    }
}

/// `S(z) = Σ ζ(ν)|z_ν|²`.
pub fn weighted_action(z: &BallPoint) -> f64 {
    let n = z.dim();
    z.coords.iter().enumerate().map(|(i, c)| weight(i, n) * c.norm_sqr()).sum()
}

/// Exact time-`t` flow of `ρ(S(z))` for an arbitrary radial profile:
/// `z_ν ↦ exp(2i·ζ(ν)·ρ′(S)·t)·z_ν`.
pub fn radial_flow(profile: &dyn RadialProfile, z: &BallPoint, t: f64) -> BallPoint {
    let n = z.dim();
    let rate = profile.slope(weighted_action(z));
    BallPoint {
        coords: z
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| Complex64::from_polar(1.0, 2.0 * weight(i, n) * rate * t) * c)
            .collect(),
    }
}

/// Which angular harmonic the perturbation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// `cos(kθ)`: critical angles `jπ/k` form a single `2k`-cycle.
    Standard,
    /// `cos(2kθ)`: critical angles `jπ/(2k)` split into two `2k`-cycles.
    Control,
}

/// Immutable bundle of everything needed to evaluate `H`, `F` and their flows.
#[derive(Debug)]
pub struct Construction {
    params: Params,
    profile: Profile,
    cutoff: Cutoff,
    perturbation: Perturbation,
    integrator: ImplicitMidpoint,
}

impl Construction {
    pub fn new(params: Params) -> Result<Self, ParamsError> {
        Self::with_perturbation(params, Perturbation::Standard)
    }

    pub fn with_perturbation(params: Params, perturbation: Perturbation) -> Result<Self, ParamsError> {
        let profile = make_rho(&params)?;
        let cutoff = make_beta(&params)?;
        Ok(Construction {
            params,
            profile,
            cutoff,
            perturbation,
            integrator: ImplicitMidpoint::new(params.integrator_step),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn perturbation(&self) -> Perturbation {
        self.perturbation
    }

    /// The angular harmonic `m` of the perturbation.
    pub fn harmonic(&self) -> u32 {
        match self.perturbation {
            Perturbation::Standard => self.params.k,
            Perturbation::Control => 2 * self.params.k,
        }
    }

    pub fn hamiltonian_h(&self, z: &BallPoint) -> f64 {
        self.profile.value(weighted_action(z))
    }

    /// Real gradient `(∂H/∂x_ν, ∂H/∂y_ν) = 2ζ(ν)ρ′(S)(x_ν, y_ν)`, interleaved.
    pub fn gradient_h(&self, z: &BallPoint) -> Vec<f64> {
        let n = z.dim();
        let rate = self.profile.slope(weighted_action(z));
        z.coords
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                let s = 2.0 * weight(i, n) * rate;
                [s * c.re, s * c.im]
            })
            .collect()
    }

    /// `F(z) = β(|z_N|²)·cos(mθ)`, zero wherever `β` vanishes.
    pub fn perturbation_f(&self, z: &BallPoint) -> f64 {
        let ell = z.last().norm_sqr();
        if self.cutoff.vanishes(ell) {
            return 0.0;
        }
        let theta = z.last().arg();
        self.cutoff.value(ell) * (f64::from(self.harmonic()) * theta).cos()
    }

    pub fn flow_h(&self, z: &BallPoint, t: f64) -> BallPoint {
        radial_flow(&self.profile, z, t)
    }

    /// Right-hand side of the perturbation flow in `(ℓ, θ)`:
    /// `ℓ̇ = −2εm·β(ℓ)·sin(mθ)`, `θ̇ = −2ε·β′(ℓ)·cos(mθ)`.
    pub fn reduced_field(&self, [ell, theta]: [f64; 2]) -> [f64; 2] {
        let m = f64::from(self.harmonic());
        let eps = self.params.epsilon;
        let (b, db) = self.cutoff.eval(ell);
        let (s, c) = (m * theta).sin_cos();
        [-2.0 * eps * m * b * s, -2.0 * eps * db * c]
    }

    /// The action after time `t` where `β ≡ 1` along the way: `ℓ − 2εm·sin(mθ)·t`.
    pub fn plateau_action(&self, ell: f64, theta: f64, t: f64) -> f64 {
        let m = f64::from(self.harmonic());
        ell - 2.0 * self.params.epsilon * m * (m * theta).sin() * t
    }

    /// Time-`t` flow of `εF`.
    ///
    /// Head coordinates are untouched. Where `β ≡ 0` the point is returned
    /// unchanged; where the whole trajectory stays on the `β ≡ 1` plateau the
    /// closed form is used; elsewhere the reduced system is integrated.
    pub fn flow_f(&self, z: &BallPoint, t: f64) -> Result<BallPoint, FlowError> {
        let polar = z.to_polar();
        if self.cutoff.vanishes(polar.ell) {
            return Ok(z.clone());
        }
        if self.cutoff.in_plateau(polar.ell) {
            let end = self.plateau_action(polar.ell, polar.theta, t);
            if self.cutoff.in_plateau(end) {
                return Ok(PolarLast { ell: end, ..polar }.to_point());
            }
        }
        self.integrate_f(z, polar, t, self.integrator)
    }

    /// Integrator-only evaluation of the perturbation flow (no closed-form
    /// shortcuts), for consistency checks.
    pub fn flow_f_integrated(&self, z: &BallPoint, t: f64) -> Result<BallPoint, FlowError> {
        self.integrate_f(z, z.to_polar(), t, self.integrator)
    }

    /// Integrated perturbation flow with a Richardson estimate of its error.
    pub fn flow_f_with_estimate(&self, z: &BallPoint, t: f64) -> Result<(BallPoint, f64), FlowError> {
        let polar = z.to_polar();
        let ([ell, theta], err) = self
            .integrator
            .integrate_with_estimate(|y| self.reduced_field(y), [polar.ell, polar.theta], t)
            .map_err(|source| FlowError::Integrator { point: z.to_reals(), source })?;
        let out = PolarLast { head: polar.head, ell, theta: wrap_angle(theta) }.to_point();
        Ok((out, err))
    }

    fn integrate_f(
        &self,
        z: &BallPoint,
        polar: PolarLast,
        t: f64,
        integrator: ImplicitMidpoint,
    ) -> Result<BallPoint, FlowError> {
        let [ell, theta] = integrator
            .integrate(|y| self.reduced_field(y), [polar.ell, polar.theta], t)
            .map_err(|source| FlowError::Integrator { point: z.to_reals(), source })?;
        Ok(PolarLast { head: polar.head, ell, theta: wrap_angle(theta) }.to_point())
    }

    /// `Φ(z) = φ_H(φ_{εF}(z))` with both flows at time 1.
    pub fn phi(&self, z: &BallPoint) -> Result<BallPoint, FlowError> {
        Ok(self.flow_h(&self.flow_f(z, 1.0)?, 1.0))
    }

    /// The rigid rotation `(e^{9iδ/5}·z_head, e^{2iδ}·z_N)` that `Φ` reduces to
    /// near the boundary sphere.
    pub fn boundary_rotation(&self, z: &BallPoint) -> BallPoint {
        let d = self.params.delta;
        let n = z.dim();
        BallPoint {
            coords: z
                .coords
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let angle = if i + 1 == n { 2.0 * d } else { 9.0 * d / 5.0 };
                    Complex64::from_polar(1.0, angle) * c
                })
                .collect(),
        }
    }

    /// The `2k` critical points `(0, …, 0, √(R²/2)·e^{ijπ/k})` forming the
    /// distinguished cycle.
    pub fn distinguished_cycle(&self) -> Vec<BallPoint> {
        let k = self.params.k as usize;
        let r = (0.5 * self.params.r2()).sqrt();
        (0..2 * k)
            .map(|j| {
                let mut coords = vec![Complex64::new(0.0, 0.0); self.params.n];
                coords[self.params.n - 1] =
                    Complex64::from_polar(r, j as f64 * std::f64::consts::PI / k as f64);
                BallPoint::new(coords)
            })
            .collect()
    }
}
