//! Robustness of cat-state generation under mechanical thermal noise and
//! optical loss: Lindblad sweeps over `n_th` (kappa = 0) and over kappa (at
//! `n_th` = 0), reporting per-record generation probability and fidelity
//! against the lossless reference.

use rayon::prelude::*;
use serde_json::json;

use super::{Cell, Experiment, ExperimentConfig, ExperimentError, RunArtifact, Summary};
use crate::analysis::{fidelity, photon_number_measurement, MeasurementOutcome, DEFAULT_PROB_FLOOR};
use crate::dynamics::{
    evolve_lindblad_charge_blocks, evolve_unitary, thermal_channels, CollapseChannel,
    SectorProjection, TimeGrid,
};
use crate::hilbert::{annihilation, fock_coherent, number, MixedState, ModeLayout, ModeRole};
use crate::model::{build_two_phonon_hamiltonian, labels, supermode_transform};
use crate::TAU;

pub struct Robustness;

const DEFAULT_REL_TOL: f64 = 1e-7;

struct SweepPoint {
    kind: &'static str,
    /// `n_th` for thermal points, kappa/g for loss points.
    value: f64,
    channels: Vec<CollapseChannel>,
}

struct PointResult {
    kind: &'static str,
    value: f64,
    sector_probability: f64,
    /// `(record, probability, fidelity vs lossless)` per full-sector record.
    records: Vec<(Vec<usize>, f64, f64)>,
    max_drift: f64,
}

impl Experiment for Robustness {
    fn name(&self) -> &'static str {
        "robustness"
    }

    fn run(
        &self,
        cfg: &ExperimentConfig,
        art: &mut RunArtifact,
    ) -> Result<Summary, ExperimentError> {
        let (params, warnings) = cfg.system_params(10e9, 3, 10.0)?;
        for w in &warnings {
            art.warn(w.clone());
        }
        let n = params.n_photons;
        let g_hz = cfg.g_hz()?;
        if g_hz <= 0.0 {
            return Err(ExperimentError::Config(
                "robustness sweeps need a positive effective coupling g".into(),
            ));
        }
        let g_ang = TAU * g_hz;
        let t_cat = cfg
            .grid
            .t_end
            .unwrap_or(std::f64::consts::PI / ((n + 1) as f64) / g_ang);
        let rel_tol = cfg.grid.rel_tol.unwrap_or(DEFAULT_REL_TOL);

        let db = cfg.mech_dim.unwrap_or(40);
        let layout = ModeLayout::from_specs(&[
            (labels::A_PLUS, n + 1, ModeRole::Optical),
            (labels::A_MINUS, n + 1, ModeRole::Optical),
            (labels::B, db, ModeRole::Mechanical),
        ])?;
        let h = build_two_phonon_hamiltonian(g_hz, &layout)?;
        let psi0 = fock_coherent(
            &layout,
            &[(labels::A_PLUS.to_string(), n)],
            labels::B,
            params.alpha,
            cfg.tail_tol,
        )?;
        let proj =
            SectorProjection::total_occupation_at_most(&layout, &[labels::A_PLUS, labels::A_MINUS], n)?;

        // lossless reference: unitary evolution, then the same measurement
        let ts_grid = TimeGrid::with_tolerance(0.0, t_cat, cfg.grid.n_samples, rel_tol)?;
        let mut ref_traj = evolve_unitary(&h, &psi0, &ts_grid)?;
        let nb = ref_traj
            .record_observable("n_b", &number(&layout, labels::B)?)
            .to_vec();
        let np = ref_traj
            .record_observable("n_plus", &number(&layout, labels::A_PLUS)?)
            .to_vec();
        let nm = ref_traj
            .record_observable("n_minus", &number(&layout, labels::A_MINUS)?)
            .to_vec();
        let rows: Vec<Vec<Cell>> = ts_grid
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| vec![t.into(), nb[i].into(), np[i].into(), nm[i].into()])
            .collect();
        art.write_csv(
            "timeseries.csv",
            &["t_s", "n_b", "n_plus", "n_minus"],
            &rows,
        )?;

        let ref_state = ref_traj
            .final_state()
            .as_pure()
            .expect("unitary evolution yields pure states")
            .clone();
        let ref_outcomes = photon_number_measurement(
            (&ref_state).into(),
            &[labels::A_PLUS, labels::A_MINUS],
            DEFAULT_PROB_FLOOR,
        )?;

        // sweep points
        let gamma = params.gamma_hz;
        let mut points: Vec<SweepPoint> = Vec::new();
        let n_th_values = cfg
            .n_th_values
            .clone()
            .unwrap_or_else(|| (0..=5).map(|v| v as f64).collect());
        for &n_th in &n_th_values {
            if n_th < 0.0 {
                return Err(ExperimentError::Config(format!(
                    "n_th_values must be non-negative, got {n_th}"
                )));
            }
            let channels = if gamma > 0.0 {
                thermal_channels(&layout, labels::B, gamma, n_th)?
            } else {
                Vec::new()
            };
            points.push(SweepPoint {
                kind: "n_th",
                value: n_th,
                channels,
            });
        }

        let sm = supermode_transform(&params)?;
        let (w_plus, w_minus) = if cfg.symmetric_loss {
            (0.5, 0.5)
        } else {
            sm.a1_loss_weights()
        };
        let kappa_over_g = cfg
            .kappa_over_g
            .clone()
            .unwrap_or_else(|| (0..=5).map(|v| 0.2 * v as f64).collect());
        let a_plus = annihilation(&layout, labels::A_PLUS)?;
        let a_minus = annihilation(&layout, labels::A_MINUS)?;
        for &f in &kappa_over_g {
            if f < 0.0 {
                return Err(ExperimentError::Config(format!(
                    "kappa_over_g must be non-negative, got {f}"
                )));
            }
            let kappa = f * g_hz;
            let mut channels = if gamma > 0.0 {
                thermal_channels(&layout, labels::B, gamma, 0.0)?
            } else {
                Vec::new()
            };
            if kappa > 0.0 {
                channels.push(CollapseChannel::new(a_plus.clone(), kappa * w_plus)?);
                channels.push(CollapseChannel::new(a_minus.clone(), kappa * w_minus)?);
            }
            points.push(SweepPoint {
                kind: "kappa",
                value: f,
                channels,
            });
        }

        let rho0 = psi0.to_mixed();
        let grid = TimeGrid::with_tolerance(0.0, t_cat, 2, rel_tol)?;
        let results: Vec<Result<PointResult, ExperimentError>> = points
            .par_iter()
            .map(|pt| run_point(pt, &h, &rho0, &grid, &ref_outcomes, n))
            .collect();

        let mut rows: Vec<Vec<Cell>> = Vec::new();
        let mut summary = Summary::new();
        let mut max_drift = 0.0f64;
        let mut thermal_min_f = f64::INFINITY;
        let mut thermal_min_p = f64::INFINITY;
        let mut loss_min_f = f64::INFINITY;
        let mut loss_probs: Vec<f64> = Vec::new();
        for res in results {
            let r = res?;
            max_drift = max_drift.max(r.max_drift);
            for (rec, p, f) in &r.records {
                rows.push(vec![
                    r.kind.into(),
                    r.value.into(),
                    rec[0].into(),
                    rec[1].into(),
                    (*p).into(),
                    (*f).into(),
                    r.sector_probability.into(),
                ]);
            }
            let min_f = r
                .records
                .iter()
                .fold(f64::INFINITY, |m, (_, _, f)| m.min(*f));
            match r.kind {
                "n_th" => {
                    thermal_min_f = thermal_min_f.min(min_f);
                    thermal_min_p = thermal_min_p.min(r.sector_probability);
                }
                _ => {
                    loss_min_f = loss_min_f.min(min_f);
                    loss_probs.push(r.sector_probability);
                }
            }
        }
        art.write_csv(
            "outcomes.csv",
            &[
                "sweep",
                "value",
                "rec_plus",
                "rec_minus",
                "probability",
                "fidelity",
                "sector_probability",
            ],
            &rows,
        )?;

        if thermal_min_f.is_finite() {
            summary.insert("thermal_min_fidelity".into(), thermal_min_f);
            summary.insert("thermal_min_sector_prob".into(), thermal_min_p);
        }
        if loss_min_f.is_finite() {
            summary.insert("loss_min_fidelity".into(), loss_min_f);
            let monotone = loss_probs.windows(2).all(|w| w[1] < w[0]);
            summary.insert(
                "loss_prob_strictly_decreasing".into(),
                if loss_probs.len() < 2 || monotone { 1.0 } else { 0.0 },
            );
        }
        summary.insert("t_cat_s".into(), t_cat);
        art.meta("g_eff_hz", json!(g_hz));
        art.meta("gamma_hz", json!(gamma));
        art.meta("loss_weights", json!([w_plus, w_minus]));
        art.meta("mech_dim", json!(db));
        art.meta("sector_dim", json!(proj.dim()));
        art.meta("rel_tol", json!(rel_tol));
        art.meta("max_trace_drift", json!(max_drift));
        Ok(summary)
    }
}

fn run_point(
    pt: &SweepPoint,
    h: &crate::hilbert::OperatorMatrix,
    rho0: &MixedState,
    grid: &TimeGrid,
    ref_outcomes: &[MeasurementOutcome],
    n: usize,
) -> Result<PointResult, ExperimentError> {
    // the interaction conserves n+ + n-, so the density matrix stays block
    // diagonal in the total photon number and loss only cascades downward
    let traj = evolve_lindblad_charge_blocks(
        h,
        &pt.channels,
        rho0,
        grid,
        &[labels::A_PLUS, labels::A_MINUS],
        n,
    )?;
    let final_state = traj
        .final_state()
        .as_mixed()
        .expect("lindblad evolution yields mixed states")
        .clone();
    let outcomes = photon_number_measurement(
        (&final_state).into(),
        &[labels::A_PLUS, labels::A_MINUS],
        DEFAULT_PROB_FLOOR,
    )?;

    let mut records = Vec::new();
    let mut sector_probability = 0.0;
    for o in &outcomes {
        if o.record.iter().sum::<usize>() != n {
            continue;
        }
        sector_probability += o.probability;
        let reference = ref_outcomes
            .iter()
            .find(|r| r.record == o.record)
            .ok_or_else(|| {
                ExperimentError::Config(format!(
                    "record {:?} absent from the lossless reference",
                    o.record
                ))
            })?;
        let f = fidelity(
            (&o.conditional_state).into(),
            (&reference.conditional_state).into(),
        )?;
        records.push((o.record.clone(), o.probability, f));
    }
    records.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(PointResult {
        kind: pt.kind,
        value: pt.value,
        sector_probability,
        records,
        max_drift: traj.max_drift(),
    })
}
