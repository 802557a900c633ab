//! Run configuration: everything that determines a run, so identical
//! configs produce identical traces.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classical::SamplerStrategy;
use crate::error::{Error, Result};
use crate::problem::{self, LinearSystem, ProblemSpec};
use crate::simstate::DEFAULT_AMPLITUDE_CAP;

/// Environment variable overriding the default amplitude cap.
pub const AMPLITUDE_CAP_ENV: &str = "QILS_AMPLITUDE_CAP";

/// Where the instance comes from: a generated spec or input files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    Spec(ProblemSpec),
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rhs: Option<PathBuf>,
    },
}

/// Start vector policy. Quantum engines need a unit start and reject
/// `Zero`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StartVector {
    #[default]
    Basis0,
    Random,
    Zero,
}

impl std::str::FromStr for StartVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basis0" => Ok(Self::Basis0),
            "random" => Ok(Self::Random),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!("unknown start vector '{other}'"))),
        }
    }
}

fn default_check_every() -> usize {
    1
}

fn default_sampler() -> SamplerStrategy {
    SamplerStrategy::Uniform
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Engine name in the registry.
    pub algorithm: String,
    pub problem: ProblemSource,
    pub steps: usize,
    /// Seed of the index-sampling stream (the instance has its own seed).
    pub seed: u64,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerStrategy,
    /// Cadence of the expensive per-step work: block-equality checks on
    /// quantum engines, full residual recomputation on the row-action
    /// classical engine. 0 disables both (and with them residual-based
    /// early stopping for that engine).
    #[serde(default = "default_check_every")]
    pub check_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_cap: Option<usize>,
    #[serde(default)]
    pub x0: StartVector,
    /// Early-stop threshold on the classical residual; 0 disables.
    #[serde(default)]
    pub residual_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(algorithm: &str, problem: ProblemSource, steps: usize, seed: u64) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            problem,
            steps,
            seed,
            sampler: SamplerStrategy::Uniform,
            check_every: 1,
            amplitude_cap: None,
            x0: StartVector::Basis0,
            residual_tol: 0.0,
            output: None,
        }
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Cap precedence: explicit config, then the environment variable,
    /// then the built-in default.
    pub fn resolve_amplitude_cap(&self) -> usize {
        if let Some(cap) = self.amplitude_cap {
            return cap;
        }
        if let Ok(text) = std::env::var(AMPLITUDE_CAP_ENV) {
            if let Ok(cap) = text.trim().parse::<usize>() {
                return cap;
            }
        }
        DEFAULT_AMPLITUDE_CAP
    }

    /// Loads or generates the raw instance.
    pub fn load_system(&self) -> Result<LinearSystem> {
        match &self.problem {
            ProblemSource::Spec(spec) => problem::generate(spec),
            ProblemSource::File { path, rhs } => problem::io::load_system(path, rhs.as_deref()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemKind;

    #[test]
    fn config_json_round_trip() {
        let config = RunConfig::new(
            "cd",
            ProblemSource::Spec(ProblemSpec::new(ProblemKind::Identity, 8, 3)),
            5,
            2,
        );
        let text = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.algorithm, "cd");
        assert_eq!(back.steps, 5);
        assert!(matches!(back.problem, ProblemSource::Spec(_)));
    }

    #[test]
    fn file_source_round_trip() {
        let config = RunConfig::new(
            "classical-kaczmarz",
            ProblemSource::File {
                path: "a.mtx".into(),
                rhs: Some("b.txt".into()),
            },
            10,
            0,
        );
        let text = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert!(matches!(back.problem, ProblemSource::File { .. }));
    }

    #[test]
    fn defaults_fill_in_when_absent() {
        let text = r#"{"algorithm":"kaczmarz","problem":{"kind":"identity","n":4,"seed":0},"steps":3,"seed":9}"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.check_every, 1);
        assert_eq!(config.x0, StartVector::Basis0);
        assert_eq!(config.residual_tol, 0.0);
        assert!(config.amplitude_cap.is_none());
    }

    #[test]
    fn cap_resolution_prefers_explicit_value() {
        let mut config = RunConfig::new(
            "kaczmarz",
            ProblemSource::Spec(ProblemSpec::new(ProblemKind::Identity, 4, 0)),
            1,
            0,
        );
        config.amplitude_cap = Some(1234);
        assert_eq!(config.resolve_amplitude_cap(), 1234);
        config.amplitude_cap = None;
        assert_eq!(config.resolve_amplitude_cap(), DEFAULT_AMPLITUDE_CAP);
    }
}
