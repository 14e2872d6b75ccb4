//! Run configuration: TOML file, then command-line overrides.
//!
//! Top-level keys mirror [`Params`] plus `grid_resolution` and `seed`; the
//! tables `[cycles]`, `[verify]` and `[sweep]` hold command options. Unknown
//! keys are rejected. `epsilon`, `newton_tol` and `dedup_radius` default to
//! values derived from `radius` and `k` when omitted.

use hamroot_core::params::epsilon_max;
use hamroot_core::{Params, ParamsError, Perturbation};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MapChoice {
    Phi,
    PhiSquared,
    FlowH,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CyclesOptions {
    /// Cycle order; `2k` when omitted.
    pub order: Option<usize>,
    pub map: MapChoice,
    pub control: bool,
}

impl Default for CyclesOptions {
    fn default() -> Self {
        CyclesOptions { order: None, map: MapChoice::Phi, control: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Overrides every per-check sample count.
    pub samples: Option<usize>,
    /// Skip the checks that need an enumeration.
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Cycle orders `k`; the top-level `k` when empty.
    pub k: Vec<u32>,
    /// Common factors applied to `delta` and `epsilon`.
    pub scales: Vec<f64>,
    pub control: bool,
    /// Size of the fixed sample for the displacement metric.
    pub samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { k: Vec::new(), scales: vec![1.0], control: false, samples: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub radius: f64,
    pub k: u32,
    pub delta: f64,
    pub epsilon: Option<f64>,
    pub integrator_step: f64,
    pub newton_tol: Option<f64>,
    pub dedup_radius: Option<f64>,
    pub grid_resolution: usize,
    pub seed: u64,
    pub cycles: CyclesOptions,
    pub verify: VerifyOptions,
    pub sweep: SweepOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = Params::default();
        RunConfig {
            n: p.n,
            radius: p.radius,
            k: p.k,
            delta: p.delta,
            epsilon: None,
            integrator_step: p.integrator_step,
            newton_tol: None,
            dedup_radius: None,
            grid_resolution: 12,
            seed: 20240601,
            cycles: CyclesOptions::default(),
            verify: VerifyOptions::default(),
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: Box<toml::de::Error> },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("{0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.into(), source: Box::new(e) })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Fills the derived defaults in place so the stored config is fully
    /// resolved.
    pub fn resolve(&mut self) {
        if self.epsilon.is_none() && self.radius > 0.0 && self.k >= 1 {
            self.epsilon = Some(0.5 * epsilon_max(self.radius, self.k));
        }
        self.newton_tol.get_or_insert(1e-10 * self.radius);
        if self.cycles.order.is_none() && self.k >= 1 {
            self.cycles.order = Some(2 * self.k as usize);
        }
        self.dedup_radius.get_or_insert(1e-5 * self.radius);
    }

    /// Validated parameters; call after [`RunConfig::resolve`].
    pub fn params(&self) -> Result<Params, ConfigError> {
        let p = Params {
            n: self.n,
            radius: self.radius,
            k: self.k,
            delta: self.delta,
            epsilon: self.epsilon.unwrap_or(f64::NAN),
            integrator_step: self.integrator_step,
            newton_tol: self.newton_tol.unwrap_or(1e-10 * self.radius),
            dedup_radius: self.dedup_radius.unwrap_or(1e-5 * self.radius),
        };
        p.validate()?;
        if self.grid_resolution < 2 {
            return Err(ConfigError::Invalid(format!("grid_resolution must be at least 2 (got {})", self.grid_resolution)));
        }
        if let Some(0) = self.cycles.order {
            return Err(ConfigError::Invalid("cycles.order must be positive".into()));
        }
        if self.sweep.scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(ConfigError::Invalid("sweep.scales must be positive".into()));
        }
        Ok(p)
    }

    pub fn perturbation(&self, control: bool) -> Perturbation {
        if control {
            Perturbation::Control
        } else {
            Perturbation::Standard
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let mut c = RunConfig::from_toml("", "inline").unwrap();
        c.resolve();
        assert_eq!(c.params().unwrap(), Params::default());
        assert_eq!(c.cycles.order, Some(6));
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        assert!(RunConfig::from_toml("kk = 3", "inline").is_err());
        assert!(RunConfig::from_toml("[cycles]\nordre = 6", "inline").is_err());
        assert!(RunConfig::from_toml("[extra]\na = 1", "inline").is_err());
    }

    #[test]
    fn derived_defaults_follow_k_and_radius() {
        let mut c = RunConfig::from_toml("k = 4\nradius = 2.0", "inline").unwrap();
        c.resolve();
        let p = c.params().unwrap();
        assert_eq!(p.epsilon, 0.5 * epsilon_max(2.0, 4));
        assert_eq!(p.newton_tol, 2e-10);
        assert_eq!(p.dedup_radius, 2e-5);
        assert_eq!(c.cycles.order, Some(8));
    }

    #[test]
    fn nested_options_parse() {
        let text = "[cycles]\nmap = \"phi-squared\"\ncontrol = true\n[sweep]\nk = [2, 3]\nscales = [1.0, 0.5]\n";
        let c = RunConfig::from_toml(text, "inline").unwrap();
        assert_eq!(c.cycles.map, MapChoice::PhiSquared);
        assert!(c.cycles.control);
        assert_eq!(c.sweep.k, vec![2, 3]);
    }

    #[test]
    fn invalid_values_name_the_invariant() {
        let mut c = RunConfig { k: 0, ..RunConfig::default() };
        c.resolve();
        assert!(c.params().unwrap_err().to_string().contains("k must be at least 1"));
        let mut c = RunConfig { delta: std::f64::consts::PI / 4.0, ..RunConfig::default() };
        c.resolve();
        assert!(c.params().unwrap_err().to_string().contains("delta"));
        let mut c = RunConfig { grid_resolution: 1, ..RunConfig::default() };
        c.resolve();
        assert!(c.params().unwrap_err().to_string().contains("grid_resolution"));
    }
}
