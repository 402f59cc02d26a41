//! Multicomponent cat-state generation: evolve `|n,0>|alpha>` under the
//! resonant two-phonon Hamiltonian, condition on an optical photon-number
//! record at snapshot times, and decompose the mechanical state into coherent
//! components.

use serde_json::json;

use super::{
    wigner_file_name, Cell, Experiment, ExperimentConfig, ExperimentError, RunArtifact, Summary,
    WignerConfig,
};
use crate::analysis::{
    cat_component_fit, number_distribution, photon_number_measurement, wigner, MeasurementOutcome,
    WignerGridSpec, DEFAULT_PROB_FLOOR,
};
use crate::dynamics::{evolve_unitary, TimeGrid};
use crate::hilbert::{fock_coherent, number, ModeLayout, ModeRole, PureState};
use crate::model::{build_two_phonon_hamiltonian, labels};
use crate::TAU;

pub struct Cat;

const DEFAULT_REL_TOL: f64 = 1e-8;

/// Component angles at scaled time `gt`: one per hopping-block eigenvalue
/// `eta in {-n, -n+2, ..., n}`, folded to (-pi, pi] and merged when two
/// candidates collide (coherent components closer than ~0.05 rad at r = 3
/// make the Gram matrix useless for counting).
pub fn component_angles(n: usize, gt: f64, merge_tol: f64) -> Vec<f64> {
    let mut angles: Vec<f64> = (0..=n)
        .map(|j| {
            let raw = (2.0 * j as f64 - n as f64) * gt;
            let a = (raw + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
            if a <= -std::f64::consts::PI + 1e-12 {
                std::f64::consts::PI
            } else {
                a
            }
        })
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for a in angles {
        let dup = out.iter().any(|&b| {
            let d = (a - b).abs();
            d < merge_tol || (TAU - d) < merge_tol
        });
        if !dup {
            out.push(a);
        }
    }
    out
}

impl Experiment for Cat {
    fn name(&self) -> &'static str {
        "cat"
    }

    fn run(
        &self,
        cfg: &ExperimentConfig,
        art: &mut RunArtifact,
    ) -> Result<Summary, ExperimentError> {
        let (params, warnings) = cfg.system_params(5e9, 3, 0.0)?;
        for w in &warnings {
            art.warn(w.clone());
        }
        let n = params.n_photons;
        let alpha = params.alpha;
        let g_hz = cfg.g_hz()?;
        if g_hz <= 0.0 {
            return Err(ExperimentError::Config(
                "cat generation needs a positive effective coupling g".into(),
            ));
        }
        let g_ang = TAU * g_hz;

        let db = cfg.mech_dim.unwrap_or(48 + 2 * n);
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
            alpha,
            cfg.tail_tol,
        )?;

        let snapshots_gt: Vec<f64> = cfg.snapshot_gt.clone().unwrap_or_else(|| {
            (1..=n + 1)
                .map(|k| k as f64 * std::f64::consts::PI / (n + 1) as f64)
                .collect()
        });
        if snapshots_gt.is_empty() {
            return Err(ExperimentError::Config("snapshot_gt must be nonempty".into()));
        }
        let t_max = snapshots_gt.iter().fold(0.0f64, |m, &x| m.max(x)) / g_ang;

        // occupation time series on a uniform grid
        let rel_tol = cfg.grid.rel_tol.unwrap_or(DEFAULT_REL_TOL);
        let t_end = cfg.grid.t_end.unwrap_or(t_max);
        let grid = TimeGrid::with_tolerance(cfg.grid.t_start, t_end, cfg.grid.n_samples, rel_tol)?;
        let mut traj = evolve_unitary(&h, &psi0, &grid)?;
        let nb = traj
            .record_observable("n_b", &number(&layout, labels::B)?)
            .to_vec();
        let np = traj
            .record_observable("n_plus", &number(&layout, labels::A_PLUS)?)
            .to_vec();
        let nm = traj
            .record_observable("n_minus", &number(&layout, labels::A_MINUS)?)
            .to_vec();
        let rows: Vec<Vec<Cell>> = grid
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

        // conserved charges along the sampled trajectory (closed system)
        let k0 = 2.0 * np[0] + nb[0];
        let max_k_drift = np
            .iter()
            .zip(&nb)
            .fold(0.0f64, |m, (p, b)| m.max((2.0 * p + b - k0).abs()));
        let photons0 = np[0] + nm[0];
        let max_photon_drift = np
            .iter()
            .zip(&nm)
            .fold(0.0f64, |m, (p, q)| m.max((p + q - photons0).abs()));

        let wspec = wigner_spec(cfg.wigner.as_ref());
        let radius = alpha.norm();
        let mut outcome_rows: Vec<Vec<Cell>> = Vec::new();
        let mut summary = Summary::new();
        let mut last_selected: Option<MeasurementOutcome> = None;
        let mut last_state: Option<PureState> = None;

        for (si, &gt) in snapshots_gt.iter().enumerate() {
            let t = gt / g_ang;
            let sgrid = TimeGrid::with_tolerance(0.0, t, 2, rel_tol)?;
            let snap = evolve_unitary(&h, &psi0, &sgrid)?;
            let state = snap
                .final_state()
                .as_pure()
                .expect("unitary evolution yields pure states")
                .clone();

            let outcomes = photon_number_measurement(
                (&state).into(),
                &[labels::A_PLUS, labels::A_MINUS],
                DEFAULT_PROB_FLOOR,
            )?;
            if outcomes.is_empty() {
                return Err(ExperimentError::Config(
                    "no measurement outcome above the probability floor".into(),
                ));
            }
            let selected = select_outcome(&outcomes, cfg.record.as_deref())?;
            let angles = component_angles(n, gt, 0.05);

            for o in &outcomes {
                let fit = cat_component_fit((&o.conditional_state).into(), &angles, radius)?;
                for (ci, (coeff, pos)) in fit.components.iter().enumerate() {
                    outcome_rows.push(vec![
                        gt.into(),
                        t.into(),
                        o.record[0].into(),
                        o.record[1].into(),
                        o.probability.into(),
                        angles.len().into(),
                        fit.residual.into(),
                        ci.into(),
                        pos.arg().into(),
                        coeff.re.into(),
                        coeff.im.into(),
                    ]);
                }
            }

            // Wigner grid of the selected conditional state
            let w = wigner((&selected.conditional_state).into(), &wspec)?;
            if w.mass_warning {
                art.warn(format!(
                    "wigner grid at gt = {gt:.6} captures only {:.6} of the state",
                    w.total_mass
                ));
            }
            art.write_wigner(&wigner_file_name(&selected.record, t), &w)?;

            if si == 0 {
                let fit =
                    cat_component_fit((&selected.conditional_state).into(), &angles, radius)?;
                summary.insert("fit_residual".into(), fit.residual);
                summary.insert("fit_probability".into(), selected.probability);
                summary.insert("n_components".into(), angles.len() as f64);
            }
            last_selected = Some(selected.clone());
            last_state = Some(state);
        }

        art.write_csv(
            "outcomes.csv",
            &[
                "gt",
                "t_s",
                "rec_plus",
                "rec_minus",
                "probability",
                "n_components",
                "residual",
                "component",
                "angle_rad",
                "coeff_re",
                "coeff_im",
            ],
            &outcome_rows,
        )?;

        // distribution and state dump at the final snapshot
        let selected = last_selected.expect("at least one snapshot");
        let dist = number_distribution((&selected.conditional_state).into(), labels::B)?;
        let rows: Vec<Vec<Cell>> = dist
            .iter()
            .enumerate()
            .map(|(k, &p)| vec![k.into(), p.into()])
            .collect();
        art.write_csv("distribution.csv", &["n", "p"], &rows)?;
        art.write_state("final_state.bin", &last_state.expect("at least one snapshot"))?;

        summary.insert("max_k_drift".into(), max_k_drift);
        summary.insert("max_photon_drift".into(), max_photon_drift);
        art.meta("g_eff_hz", json!(g_hz));
        art.meta("snapshot_gt", json!(snapshots_gt));
        art.meta("mech_dim", json!(db));
        art.meta("rel_tol", json!(rel_tol));
        art.meta("max_norm_drift", json!(traj.max_drift()));
        art.meta("tail_tol", json!(cfg.tail_tol));
        Ok(summary)
    }
}

fn wigner_spec(cfg: Option<&WignerConfig>) -> WignerGridSpec {
    match cfg {
        None => WignerGridSpec::default_for_alpha3(),
        Some(w) => WignerGridSpec {
            x_min: w.x_min,
            x_max: w.x_max,
            p_min: w.p_min,
            p_max: w.p_max,
            nx: w.nx,
            np: w.np,
        },
    }
}

fn select_outcome<'a>(
    outcomes: &'a [MeasurementOutcome],
    record: Option<&[usize]>,
) -> Result<&'a MeasurementOutcome, ExperimentError> {
    match record {
        None => Ok(&outcomes[0]),
        Some(rec) => outcomes
            .iter()
            .find(|o| o.record == rec)
            .ok_or_else(|| {
                ExperimentError::Config(format!(
                    "requested record {rec:?} has probability below the floor"
                ))
            }),
    }
}
