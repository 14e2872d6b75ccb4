//! Evaluable self-maps of the ball.
//!
//! Everything the dynamics and obstruction code consumes goes through
//! [`SelfMap`]; [`MapHandle`] is the shared, thread-safe handle.

use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

use crate::construction::{Construction, FlowError};
use crate::params::Params;
use crate::point::BallPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("orbit left the ball after {steps} steps at {point:?}")]
    Escape { steps: usize, point: Vec<f64> },
    #[error("dimension mismatch: map acts on C^{expected}, point has {got} coordinates")]
    Dimension { expected: usize, got: usize },
}

/// Name and parameter snapshot of a map.
#[derive(Debug, Clone, Serialize)]
pub struct MapInfo {
    pub name: String,
    pub params: Option<Params>,
}

/// A deterministic smooth self-map of the closed ball in `ℂ^N`.
pub trait SelfMap: Send + Sync {
    fn info(&self) -> MapInfo;
    fn dim(&self) -> usize;
    fn radius(&self) -> f64;
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError>;
}

pub type MapHandle = Arc<dyn SelfMap>;

fn check_dim(map: &dyn SelfMap, z: &BallPoint) -> Result<(), MapError> {
    if z.dim() != map.dim() {
        return Err(MapError::Dimension { expected: map.dim(), got: z.dim() });
    }
    Ok(())
}

pub struct Identity {
    pub n: usize,
    pub radius: f64,
}

impl SelfMap for Identity {
    fn info(&self) -> MapInfo {
        MapInfo { name: "identity".into(), params: None }
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        check_dim(self, z)?;
        Ok(z.clone())
    }
}

/// `z_ν ↦ e^{iα_ν}·z_ν`.
pub struct RigidRotation {
    pub angles: Vec<f64>,
    pub radius: f64,
}

impl SelfMap for RigidRotation {
    fn info(&self) -> MapInfo {
        MapInfo { name: format!("rotation{:?}", self.angles), params: None }
    }
    fn dim(&self) -> usize {
        self.angles.len()
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        check_dim(self, z)?;
        Ok(BallPoint::new(
            z.coords
                .iter()
                .zip(&self.angles)
                .map(|(c, a)| Complex64::from_polar(1.0, *a) * c)
                .collect(),
        ))
    }
}

/// Time-`t` map of the unperturbed Hamiltonian `H`.
pub struct FlowH {
    pub construction: Arc<Construction>,
    pub t: f64,
}

impl SelfMap for FlowH {
    fn info(&self) -> MapInfo {
        MapInfo { name: format!("flow_h(t={})", self.t), params: Some(*self.construction.params()) }
    }
    fn dim(&self) -> usize {
        self.construction.params().n
    }
    fn radius(&self) -> f64 {
        self.construction.params().radius
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        check_dim(self, z)?;
        Ok(self.construction.flow_h(z, self.t))
    }
}

/// Time-`t` map of the perturbation `εF`.
pub struct FlowF {
    pub construction: Arc<Construction>,
    pub t: f64,
}

impl SelfMap for FlowF {
    fn info(&self) -> MapInfo {
        MapInfo { name: format!("flow_f(t={})", self.t), params: Some(*self.construction.params()) }
    }
    fn dim(&self) -> usize {
        self.construction.params().n
    }
    fn radius(&self) -> f64 {
        self.construction.params().radius
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        check_dim(self, z)?;
        Ok(self.construction.flow_f(z, self.t)?)
    }
}

/// `Φ = φ_H ∘ φ_{εF}`; the perturbation flow is applied first.
pub struct Phi {
    pub construction: Arc<Construction>,
}

impl SelfMap for Phi {
    fn info(&self) -> MapInfo {
        let name = match self.construction.perturbation() {
            crate::construction::Perturbation::Standard => "phi",
            crate::construction::Perturbation::Control => "phi_control",
        };
        MapInfo { name: name.into(), params: Some(*self.construction.params()) }
    }
    fn dim(&self) -> usize {
        self.construction.params().n
    }
    fn radius(&self) -> f64 {
        self.construction.params().radius
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        check_dim(self, z)?;
        Ok(self.construction.phi(z)?)
    }
}

/// `outer ∘ inner`.
pub struct Compose {
    pub outer: MapHandle,
    pub inner: MapHandle,
}

impl SelfMap for Compose {
    fn info(&self) -> MapInfo {
        let (o, i) = (self.outer.info(), self.inner.info());
        MapInfo { name: format!("{}∘{}", o.name, i.name), params: o.params.or(i.params) }
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn radius(&self) -> f64 {
        self.inner.radius()
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        self.outer.apply(&self.inner.apply(z)?)
    }
}

pub fn identity(n: usize, radius: f64) -> MapHandle {
    Arc::new(Identity { n, radius })
}

pub fn rotation(angles: Vec<f64>, radius: f64) -> MapHandle {
    Arc::new(RigidRotation { angles, radius })
}

pub fn flow_h(construction: &Arc<Construction>, t: f64) -> MapHandle {
    Arc::new(FlowH { construction: Arc::clone(construction), t })
}

pub fn flow_f(construction: &Arc<Construction>, t: f64) -> MapHandle {
    Arc::new(FlowF { construction: Arc::clone(construction), t })
}

pub fn phi(construction: &Arc<Construction>) -> MapHandle {
    Arc::new(Phi { construction: Arc::clone(construction) })
}

pub fn compose(outer: &MapHandle, inner: &MapHandle) -> MapHandle {
    Arc::new(Compose { outer: Arc::clone(outer), inner: Arc::clone(inner) })
}

/// `map ∘ map`.
pub fn square(map: &MapHandle) -> MapHandle {
    compose(map, map)
}
