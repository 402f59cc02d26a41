//! Conditional measurement, Wigner functions, fidelities, occupation
//! statistics, and closed-form oracles for the three-photon eigensystem and
//! the multicomponent cat states it generates.

mod cat;
mod fidelity;
mod measurement;
mod occupation;
mod wigner;

pub use cat::{
    analytic_cat_state, cat_component_fit, three_photon_eigensystem, with_coherent_mode,
    CatDecomposition,
};
pub use fidelity::fidelity;
pub use measurement::{photon_number_measurement, MeasurementOutcome, DEFAULT_PROB_FLOOR};
pub use occupation::{number_distribution, occupation_series};
pub use wigner::{wigner, WignerGrid, WignerGridSpec, WIGNER_CONVENTION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Hilbert(#[from] crate::hilbert::HilbertError),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("operation requires a single-mode state, got {0} modes")]
    NotSingleMode(usize),
    #[error("analytic cat states are available for n in {{1, 3}}, got n = {0}")]
    UnsupportedCatOrder(usize),
    #[error("candidate angle list must be nonempty")]
    EmptyAngles,
    #[error("coherent components overlap by {overlap:.4} (> 0.99); the Gram matrix is too ill-conditioned to count components")]
    IllConditioned { overlap: f64 },
    #[error("mode `{0}` must be in vacuum before tensoring a coherent state onto it")]
    ModeNotVacuum(String),
    #[error("mode `{label}` needs dim >= {needed} for the 3-photon subspace, got {dim}")]
    DimTooSmall {
        label: String,
        needed: usize,
        dim: usize,
    },
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

impl From<ndarray_linalg::error::LinalgError> for AnalysisError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        AnalysisError::Linalg(e.to_string())
    }
}
