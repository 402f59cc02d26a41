//! Experiment drivers behind the `catres` CLI: each experiment is a
//! trait object registered by name, configured from one JSON document, and
//! serialized into a fixed-filename artifact directory.

pub mod artifact;
pub mod config;

mod cat;
mod robustness;
mod sweep;
mod two_phonon;

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

pub use artifact::{fmt_sig, wigner_file_name, Cell, RunArtifact};
pub use cat::component_angles;
pub use config::{ExperimentConfig, GridConfig, SweepAxis, SweepConfig, WignerConfig};

use crate::analysis::AnalysisError;
use crate::dynamics::DynamicsError;
use crate::hilbert::HilbertError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// CLI exit code: 2 for configuration/validation failures, 3 for
    /// numerical-tolerance failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Dynamics(e) => match e {
                DynamicsError::ToleranceNotMet { .. }
                | DynamicsError::TraceDrift { .. }
                | DynamicsError::NonHermitian { .. }
                | DynamicsError::SubstepTooCoarse { .. } => 3,
                _ => 2,
            },
            ExperimentError::Analysis(AnalysisError::IllConditioned { .. }) => 3,
            ExperimentError::Analysis(AnalysisError::Linalg(_)) => 3,
            _ => 2,
        }
    }
}

/// Scalar results surfaced in `meta.json` and merged by parameter sweeps.
pub type Summary = BTreeMap<String, f64>;

/// One runnable experiment, selected by CLI subcommand name.
pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig, art: &mut RunArtifact)
        -> Result<Summary, ExperimentError>;
}

/// All registered experiments.
pub fn registry() -> &'static [&'static dyn Experiment] {
    static REGISTRY: &[&dyn Experiment] = &[
        &two_phonon::TwoPhonon,
        &cat::Cat,
        &robustness::Robustness,
        &sweep::Sweep,
    ];
    REGISTRY
}

pub fn find_experiment(name: &str) -> Option<&'static dyn Experiment> {
    registry().iter().copied().find(|e| e.name() == name)
}

/// Runs the experiment named in `cfg` into `out_dir` and writes metadata.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Summary, ExperimentError> {
    let exp = find_experiment(&cfg.experiment).ok_or_else(|| {
        ExperimentError::Config(format!(
            "unknown experiment `{}`; available: {}",
            cfg.experiment,
            registry()
                .iter()
                .map(|e| e.name())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })?;
    let mut art = RunArtifact::create(out_dir, &cfg.canonical_json(), &cfg.hash())?;
    let summary = exp.run(cfg, &mut art)?;
    art.finish(&summary)?;
    Ok(summary)
}
