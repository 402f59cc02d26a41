//! Time evolution: unitary propagation for static and time-dependent
//! Hamiltonians, and Lindblad master-equation propagation with loss channels.

mod evolve;
mod lindblad;
mod ode;

pub use evolve::{evolve_time_dependent, evolve_unitary, required_substep};
pub use lindblad::{
    evolve_lindblad, evolve_lindblad_charge_blocks, evolve_lindblad_in_sector, SectorProjection,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::hilbert::{HilbertError, MixedState, ModeLayout, OperatorMatrix, PureState};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("time grid must be strictly increasing with at least 2 samples (t_start={t_start}, t_end={t_end}, n_samples={n_samples})")]
    BadGrid {
        t_start: f64,
        t_end: f64,
        n_samples: usize,
    },
    #[error("integrator tolerance must be positive (got {0})")]
    BadTolerance(f64),
    #[error("Hamiltonian is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NonHermitian { defect: f64, tol: f64 },
    #[error("collapse-channel rate must be non-negative (got {0} Hz)")]
    NegativeRate(f64),
    #[error("integration stalled at t = {t:.6e} s: local error ratio {achieved:.3e} with the minimum step; requested tolerance cannot be met")]
    ToleranceNotMet { t: f64, achieved: f64 },
    #[error("substep {substep:.3e} s too coarse for max term frequency {f_max:.3e} Hz; need <= {required:.3e} s")]
    SubstepTooCoarse {
        substep: f64,
        f_max: f64,
        required: f64,
    },
    #[error("trace drifted to |tr rho - 1| = {drift:.3e} at t = {t:.6e} s")]
    TraceDrift { t: f64, drift: f64 },
    #[error("sector projection left an empty basis")]
    EmptySector,
    #[error("charge-block structure violated: {0}")]
    ChargeStructure(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Uniform sampling grid with integrator tolerance.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    /// Relative error target per sample (default 1e-8).
    pub rel_tol: f64,
}

impl TimeGrid {
    pub const DEFAULT_REL_TOL: f64 = 1e-8;

    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self, DynamicsError> {
        Self::with_tolerance(t_start, t_end, n_samples, Self::DEFAULT_REL_TOL)
    }

    pub fn with_tolerance(
        t_start: f64,
        t_end: f64,
        n_samples: usize,
        rel_tol: f64,
    ) -> Result<Self, DynamicsError> {
        if !(t_end > t_start) || n_samples < 2 {
            return Err(DynamicsError::BadGrid {
                t_start,
                t_end,
                n_samples,
            });
        }
        if !(rel_tol > 0.0) {
            return Err(DynamicsError::BadTolerance(rel_tol));
        }
        Ok(Self {
            t_start,
            t_end,
            n_samples,
            rel_tol,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = (self.t_end - self.t_start) / (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|i| {
                if i + 1 == self.n_samples {
                    self.t_end
                } else {
                    self.t_start + dt * i as f64
                }
            })
            .collect()
    }
}

/// One Lindblad collapse channel: `rate * (L rho L^dag - {L^dag L, rho}/2)`.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub operator: OperatorMatrix,
    /// Ordinary-frequency rate; converted to angular units (x 2*pi) inside the
    /// master equation to match the angular Hamiltonian.
    pub rate_hz: f64,
}

impl CollapseChannel {
    pub fn new(operator: OperatorMatrix, rate_hz: f64) -> Result<Self, DynamicsError> {
        if rate_hz < 0.0 {
            return Err(DynamicsError::NegativeRate(rate_hz));
        }
        Ok(Self { operator, rate_hz })
    }

    /// Rate in angular units (1/s), matching the angular Hamiltonian.
    pub fn rate_angular(&self) -> f64 {
        crate::TAU * self.rate_hz
    }
}

/// A sampled state along an evolution.
#[derive(Debug, Clone)]
pub enum TrajectoryState {
    Pure(PureState),
    Mixed(MixedState),
}

impl TrajectoryState {
    pub fn expect(&self, op: &OperatorMatrix) -> f64 {
        match self {
            TrajectoryState::Pure(psi) => op.expectation(psi).map(|z| z.re).unwrap_or(f64::NAN),
            TrajectoryState::Mixed(rho) => rho.expectation(op.entries()).re,
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            TrajectoryState::Pure(p) => Some(p),
            TrajectoryState::Mixed(_) => None,
        }
    }

    pub fn as_mixed(&self) -> Option<&MixedState> {
        match self {
            TrajectoryState::Mixed(m) => Some(m),
            TrajectoryState::Pure(_) => None,
        }
    }
}

/// Sampled evolution with per-sample norm/trace bookkeeping.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TrajectoryState>,
    /// |norm - 1| (pure) or |trace - 1| (mixed) at each sample.
    pub norm_drift: Vec<f64>,
    pub observables: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Norm/trace deviation above this adds a warning to the trajectory.
pub const DRIFT_WARN: f64 = 1e-6;
/// Trace deviation above this aborts a Lindblad run.
pub const TRACE_ABORT: f64 = 1e-4;

impl Trajectory {
    pub(crate) fn new(times: Vec<f64>) -> Self {
        let n = times.len();
        Self {
            times,
            states: Vec::with_capacity(n),
            norm_drift: Vec::with_capacity(n),
            observables: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, state: TrajectoryState, drift: f64) {
        if drift >= DRIFT_WARN {
            self.warnings.push(format!(
                "norm/trace drift {drift:.3e} at sample {} (t = {:.6e} s)",
                self.states.len(),
                self.times[self.states.len()]
            ));
        }
        self.states.push(state);
        self.norm_drift.push(drift);
    }

    pub fn final_state(&self) -> &TrajectoryState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Records `<op>(t)` under `name` and returns the series.
    pub fn record_observable(&mut self, name: &str, op: &OperatorMatrix) -> &[f64] {
        let series: Vec<f64> = self.states.iter().map(|s| s.expect(op)).collect();
        self.observables.entry(name.to_string()).or_insert(series)
    }

    pub fn max_drift(&self) -> f64 {
        self.norm_drift.iter().cloned().fold(0.0, f64::max)
    }
}

/// CODATA 2018 reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// CODATA 2018 (exact) Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Bose-Einstein occupation `1/(exp(hbar*2*pi*f / (k_B T)) - 1)`.
pub fn thermal_occupation(omega_hz: f64, temperature_k: f64) -> Result<f64, DynamicsError> {
    if !(temperature_k > 0.0) {
        return Err(DynamicsError::BadTolerance(temperature_k));
    }
    let x = HBAR * crate::TAU * omega_hz / (K_B * temperature_k);
    Ok(1.0 / (x.exp() - 1.0))
}

/// Builds the standard thermal channels for the mechanical mode:
/// `sqrt(gamma (n_th + 1)) b` and `sqrt(gamma n_th) b^dag`.
pub fn thermal_channels(
    layout: &Arc<ModeLayout>,
    mode: &str,
    gamma_hz: f64,
    n_th: f64,
) -> Result<Vec<CollapseChannel>, DynamicsError> {
    let b = crate::hilbert::annihilation(layout, mode)?;
    let mut out = vec![CollapseChannel::new(b.clone(), gamma_hz * (n_th + 1.0))?];
    if n_th > 0.0 {
        out.push(CollapseChannel::new(b.dagger(), gamma_hz * n_th)?);
    }
    Ok(out)
}
