use std::path::Path;

use anyhow::{Context, Result};
use blowup_core::integrator::IntegratorConfig;
use blowup_core::pde::ModelParams;
use serde::{Deserialize, Serialize};

/// Settings from a JSON config file or command-line flags. Every field is
/// optional so the two sources can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_modes: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub t_end: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub complex_path: Option<bool>,
}

impl LabConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// `other` wins wherever it is set.
    pub fn overlay(self, other: LabConfig) -> LabConfig {
        LabConfig {
            alpha: other.alpha.or(self.alpha),
            epsilon: other.epsilon.or(self.epsilon),
            n_modes: other.n_modes.or(self.n_modes),
            rtol: other.rtol.or(self.rtol),
            atol: other.atol.or(self.atol),
            seed: other.seed.or(self.seed),
            jobs: other.jobs.or(self.jobs),
            t_end: other.t_end.or(self.t_end),
            times: other.times.or(self.times),
            complex_path: other.complex_path.or(self.complex_path),
        }
    }

    pub fn resolve(&self, defaults: (f64, f64)) -> RunConfig {
        let base = IntegratorConfig::default();
        RunConfig {
            alpha: self.alpha.unwrap_or(defaults.0),
            epsilon: self.epsilon.unwrap_or(defaults.1),
            n_modes: self.n_modes.unwrap_or(128),
            rtol: self.rtol.unwrap_or(base.rtol),
            atol: self.atol.unwrap_or(base.atol),
            seed: self.seed.unwrap_or(0),
            jobs: self.jobs.unwrap_or(1).max(1),
            t_end: self.t_end,
            times: self.times.clone().unwrap_or_default(),
            complex_path: self.complex_path.unwrap_or(false),
        }
    }
}

/// Fully resolved settings; this is what the manifest echoes and hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub n_modes: usize,
    pub rtol: f64,
    pub atol: f64,
    pub seed: u64,
    pub jobs: usize,
    pub t_end: Option<f64>,
    pub times: Vec<f64>,
    pub complex_path: bool,
}

impl RunConfig {
    pub fn model(&self) -> ModelParams {
        let mut p = ModelParams::new(self.alpha, self.epsilon).with_modes(self.n_modes);
        p.integrator.rtol = self.rtol;
        p.integrator.atol = self.atol;
        p
    }
}
