//! Run configuration: a single JSON document with dotted-path CLI overrides.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::model::{effective_coupling, SystemParams};

/// Uniform sampling grid (seconds); `t_end = None` lets the experiment pick
/// its default window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t_start: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

fn default_n_samples() -> usize {
    400
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: None,
            n_samples: default_n_samples(),
            rel_tol: None,
        }
    }
}

/// Phase-space window for Wigner output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

/// One sweep axis: a dotted path into this document plus the values to visit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

/// Free-form parameter sweep wrapping one of the base experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Base experiment run at each grid point.
    pub base: String,
    /// 1-2 numeric axes; empty means a single base run.
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
}

/// The whole run configuration. Every field has a default except
/// `experiment`; the CLI `--set key=value` flags override any leaf by dotted
/// path after defaults are filled in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `two-phonon`, `cat`, `robustness`, or `sweep`.
    #[serde(default)]
    pub experiment: String,

    // -- physical parameters (ordinary Hz) --
    #[serde(default = "default_g0")]
    pub g0_hz: f64,
    #[serde(default = "default_delta")]
    pub delta_hz: f64,
    /// Mechanical frequency; default depends on the experiment
    /// (5 GHz for two-phonon/cat, 10 GHz for robustness).
    #[serde(default)]
    pub omega_m_hz: Option<f64>,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    /// Two-phonon detuning `omega_+ - omega_- - 2 omega_m` in units of the
    /// effective coupling g; `None` selects the n-photon resonance `1 - 2n`.
    #[serde(default)]
    pub detuning_in_g: Option<f64>,
    /// Initial photon number in supermode a+; default depends on the
    /// experiment (1 for two-phonon, 3 for cat/robustness).
    #[serde(default)]
    pub n_photons: Option<usize>,
    #[serde(default = "default_alpha_re")]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    #[serde(default)]
    pub kappa_hz: f64,
    /// Mechanical damping; default depends on the experiment
    /// (0 for two-phonon/cat, 10 Hz for robustness).
    #[serde(default)]
    pub gamma_hz: Option<f64>,
    #[serde(default)]
    pub n_th: Option<f64>,
    #[serde(default)]
    pub temperature_k: Option<f64>,

    // -- numerics --
    #[serde(default)]
    pub grid: GridConfig,
    /// Mechanical truncation dim; `None` picks an experiment default.
    #[serde(default)]
    pub mech_dim: Option<usize>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Escalate regime warnings to refusals.
    #[serde(default)]
    pub strict_regime: bool,

    // -- measurement / output selectors --
    /// Photon-number record `[n_plus, n_minus]` to condition on;
    /// `None` selects the most probable outcome.
    #[serde(default)]
    pub record: Option<Vec<usize>>,
    /// Snapshot times in units of g*t (radians); default is the ladder
    /// `k*pi/(n+1)`, k = 1..=n+1.
    #[serde(default)]
    pub snapshot_gt: Option<Vec<f64>>,
    /// Target time (s) for the two-phonon distribution output; default is the
    /// full-transfer time `pi / (2 sqrt(2) g_angular)`.
    #[serde(default)]
    pub target_time_s: Option<f64>,
    #[serde(default)]
    pub wigner: Option<WignerConfig>,

    // -- robustness sweeps --
    /// Thermal occupations visited at kappa = 0; default `[0, 1, ..., 5]`.
    #[serde(default)]
    pub n_th_values: Option<Vec<f64>>,
    /// Optical loss rates in units of g, at n_th = 0;
    /// default `[0, 0.2, ..., 1.0]`.
    #[serde(default)]
    pub kappa_over_g: Option<Vec<f64>>,
    /// Split the a1 loss rate evenly over a+/a- instead of weighting by the
    /// supermode overlaps.
    #[serde(default)]
    pub symmetric_loss: bool,

    // -- sweep --
    #[serde(default)]
    pub sweep: Option<SweepConfig>,

    /// Reserved; every run is deterministic.
    #[serde(default)]
    pub seed: u64,
}

fn default_g0() -> f64 {
    1e6
}
fn default_delta() -> f64 {
    5e6
}
fn default_carrier() -> f64 {
    50e9
}
fn default_alpha_re() -> f64 {
    3.0
}
fn default_tail_tol() -> f64 {
    1e-8
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

impl ExperimentConfig {
    /// Parses a JSON document, fills defaults, applies `key=value` overrides
    /// by dotted path, and pins the experiment name.
    pub fn load(
        json: &str,
        experiment: Option<&str>,
        sets: &[String],
    ) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = serde_json::from_str(json)
            .map_err(|e| ExperimentError::Config(format!("config parse: {e}")))?;
        let mut value = serde_json::to_value(&cfg).expect("config serializes");
        for s in sets {
            let (path, raw) = s
                .split_once('=')
                .ok_or_else(|| ExperimentError::Config(format!("--set `{s}` is not key=value")))?;
            let new: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
            set_path(&mut value, path, new)?;
        }
        let mut cfg: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| ExperimentError::Config(format!("config after overrides: {e}")))?;
        if let Some(exp) = experiment {
            if !cfg.experiment.is_empty() && cfg.experiment != exp {
                return Err(ExperimentError::Config(format!(
                    "config names experiment `{}` but the subcommand is `{exp}`",
                    cfg.experiment
                )));
            }
            cfg.experiment = exp.to_string();
        }
        if cfg.experiment.is_empty() {
            return Err(ExperimentError::Config(
                "no experiment selected (subcommand or `experiment` field)".into(),
            ));
        }
        Ok(cfg)
    }

    /// Canonical serialization; its SHA-256 is the config hash embedded in
    /// every output file.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_json().as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.alpha_re, self.alpha_im)
    }

    pub fn n_photons_or(&self, default: usize) -> usize {
        self.n_photons.unwrap_or(default)
    }

    /// Effective two-phonon coupling `g0^2 / (8 delta)` in Hz.
    pub fn g_hz(&self) -> Result<f64, ExperimentError> {
        Ok(effective_coupling(self.g0_hz, self.delta_hz)?)
    }

    /// Assembles validated system parameters on (or detuned off) the
    /// two-phonon resonance; regime warnings are returned, or escalated to a
    /// refusal under `strict_regime`.
    pub fn system_params(
        &self,
        default_omega_m: f64,
        default_n: usize,
        default_gamma: f64,
    ) -> Result<(SystemParams, Vec<String>), ExperimentError> {
        let n = self.n_photons_or(default_n);
        let g = self.g_hz()?;
        let d_in_g = self.detuning_in_g.unwrap_or(1.0 - 2.0 * n as f64);
        let mut p = SystemParams::from_resonance(
            self.g0_hz,
            self.delta_hz,
            self.omega_m_hz.unwrap_or(default_omega_m),
            d_in_g * g,
            self.carrier_hz,
        )?;
        p.g0_hz = self.g0_hz;
        p.kappa_hz = self.kappa_hz;
        p.gamma_hz = self.gamma_hz.unwrap_or(default_gamma);
        p.n_th = self.n_th;
        p.temperature_k = self.temperature_k;
        p.alpha = self.alpha();
        p.n_photons = n;
        let warnings = p.validate()?;
        if self.strict_regime && !warnings.is_empty() {
            return Err(ExperimentError::Config(format!(
                "regime check refused the run: {}",
                warnings.join("; ")
            )));
        }
        Ok((p, warnings))
    }
}

/// Replaces the leaf at `path` (dot-separated object keys / array indices)
/// with `new`. Unknown keys and out-of-range indices are errors so typos in
/// `--set` fail loudly.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), ExperimentError> {
    let mut cur = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        match cur {
            Value::Object(map) => {
                let slot = map.get_mut(*seg).ok_or_else(|| {
                    ExperimentError::Config(format!("unknown config key `{seg}` in `{path}`"))
                })?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                // allow descending into optional sections that default to null
                if slot.is_null() {
                    return Err(ExperimentError::Config(format!(
                        "`{seg}` is null in `{path}`; set the whole object first"
                    )));
                }
                cur = slot;
            }
            Value::Array(arr) => {
                let idx: usize = seg.parse().map_err(|_| {
                    ExperimentError::Config(format!("`{seg}` is not an array index in `{path}`"))
                })?;
                let len = arr.len();
                let slot = arr.get_mut(idx).ok_or_else(|| {
                    ExperimentError::Config(format!(
                        "index {idx} out of range ({len} entries) in `{path}`"
                    ))
                })?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                cur = slot;
            }
            _ => {
                return Err(ExperimentError::Config(format!(
                    "`{path}` descends into a scalar at `{seg}`"
                )))
            }
        }
    }
    unreachable!("loop returns on the last segment")
}
