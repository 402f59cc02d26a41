//! Truncated-Fock-space operator algebra for multimode bosonic systems.

mod layout;
mod operator;
mod state;

pub use layout::{Mode, ModeLayout, ModeRole};
pub use operator::{annihilation, creation, identity, number, OperatorMatrix};
pub use state::{
    coherent_state, fock_coherent, fock_state, partial_trace, MixedState, PureState, StateView,
    DEFAULT_TAIL_TOL,
};

use thiserror::Error;

pub type C64 = num_complex::Complex64;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("layout must contain at least one mode")]
    EmptyLayout,
    #[error("mode `{label}` has dim {dim}; every mode needs dim >= 2")]
    DimTooSmall { label: String, dim: usize },
    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown mode label `{0}`")]
    UnknownMode(String),
    #[error("occupation tuple has {got} entries, layout has {expected} modes")]
    OccupationArity { expected: usize, got: usize },
    #[error("occupation {occupation} exceeds truncation dim {dim} of mode `{label}`")]
    Truncation {
        label: String,
        occupation: usize,
        dim: usize,
    },
    #[error(
        "coherent state tail {tail:.3e} on mode `{label}` exceeds tolerance {tol:.3e}; \
         a truncation dim of at least {required_dim} is needed"
    )]
    CoherentTail {
        label: String,
        tail: f64,
        tol: f64,
        required_dim: usize,
    },
    #[error("operands live on different layouts")]
    LayoutMismatch,
    #[error("`keep` set must be a nonempty subset of the layout modes")]
    BadKeepSet,
    #[error("state is not normalizable (norm = {0:.3e})")]
    NotNormalizable(f64),
}
