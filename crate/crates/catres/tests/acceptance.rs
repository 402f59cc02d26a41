//! Acceptance gate: every criterion A1-A10 at its stated tolerance, with a
//! per-criterion pass/fail report. Criteria known to be unattainable with the
//! implemented physics are still asserted at their stated thresholds; the
//! measured values are printed so the gap is visible.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use catres::analysis::{
    analytic_cat_state, cat_component_fit, fidelity, photon_number_measurement,
    three_photon_eigensystem, DEFAULT_PROB_FLOOR,
};
use catres::dynamics::{evolve_time_dependent, evolve_unitary, TimeGrid};
use catres::experiment::{component_angles, run_experiment, ExperimentConfig, Summary};
use catres::hilbert::{fock_coherent, fock_state, number, ModeLayout, ModeRole};
use catres::model::{
    build_effective_hamiltonian, build_two_phonon_hamiltonian, effective_coupling, labels,
    supermode_transform, EffectiveModel, SystemParams,
};
use catres::TAU;

type Check = Result<(), String>;

fn fail(msg: String) -> Check {
    Err(msg)
}

// ---------------------------------------------------------------- criteria

/// A1: supermode transform orthogonality and diagonalization over 1e4 random
/// valid parameter sets.
fn a1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_orth = 0.0f64;
    let mut worst_diag = 0.0f64;
    for _ in 0..10_000 {
        let g0: f64 = rng.gen_range(1e5..5e6);
        let delta: f64 = rng.gen_range(5.0 * g0..50.0 * g0);
        let omega_m: f64 = rng.gen_range(100.0 * delta..1000.0 * delta);
        let g = effective_coupling(g0, delta).map_err(|e| e.to_string())?;
        let det: f64 = rng.gen_range(-5.0 * g..5.0 * g);
        let carrier: f64 = rng.gen_range(10e9..100e9);
        let p = SystemParams::from_resonance(g0, delta, omega_m, det, carrier)
            .map_err(|e| e.to_string())?;
        let sm = supermode_transform(&p).map_err(|e| e.to_string())?;
        let m = sm.m;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((dot - target).abs());
            }
        }
        // optical block in the (a1, a2, a3) basis
        let h = [
            [p.omega1_hz, p.mu_hz, 0.0],
            [p.mu_hz, p.omega2_hz, p.mu_hz],
            [0.0, p.mu_hz, p.omega3_hz],
        ];
        let evs = [sm.omega_plus_hz, sm.omega_zero_hz, sm.omega_minus_hz];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        v += m[i][a] * h[a][b] * m[j][b];
                    }
                }
                let target = if i == j { evs[i] } else { 0.0 };
                worst_diag = worst_diag.max((v - target).abs() / evs[0].abs());
            }
        }
    }
    if worst_orth >= 1e-12 {
        return fail(format!("orthogonality defect {worst_orth:.3e} >= 1e-12"));
    }
    if worst_diag >= 1e-9 {
        return fail(format!("diagonalization defect {worst_diag:.3e} >= 1e-9"));
    }
    println!("    orthogonality {worst_orth:.3e}, diagonalization {worst_diag:.3e}");
    Ok(())
}

/// Shared default two-phonon run (backs A2 and A3).
fn two_phonon_summary() -> Result<Summary, String> {
    let cfg = ExperimentConfig::load("{}", Some("two-phonon"), &[]).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_experiment(&cfg, dir.path()).map_err(|e| e.to_string())
}

/// A2: g = g0/40 exactly at the default point, and the Rabi fit of the
/// coupled-mode dynamics recovers it within 5%.
fn a2(summary: &Summary) -> Check {
    let g = effective_coupling(1e6, 5e6).map_err(|e| e.to_string())?;
    if g != 25_000.0 {
        return fail(format!("effective coupling {g} != g0/40 = 25000"));
    }
    let err = summary
        .get("g_fit_rel_err")
        .ok_or("missing g_fit_rel_err")?;
    println!("    g = g0/40 exactly; Rabi-fit relative error {err:.3e}");
    if err.abs() >= 0.05 {
        return fail(format!("Rabi fit off by {err:.3e} (allowed 5e-2)"));
    }
    Ok(())
}

/// A3: phonon-pair population at the transfer time under the resonant and
/// detuned effective models, and coupled-mode vs effective occupation curves
/// within 0.05 over [0, 10 us].
fn a3(summary: &Summary) -> Check {
    let p_res = summary["p_nb2n_resonant"];
    let p_eff = summary["p_nb2n_eff"];
    let dev = summary["max_dev_n_b"].max(summary["max_dev_n_plus"]);
    println!(
        "    P(n_b=2): resonant {p_res:.6}, detuned effective {p_eff:.6}; max curve deviation {dev:.4}"
    );
    let mut errs = Vec::new();
    if p_res <= 0.99 {
        errs.push(format!("resonant P(n_b=2) = {p_res:.6} <= 0.99"));
    }
    if p_eff <= 0.95 {
        errs.push(format!("effective P(n_b=2) = {p_eff:.6} <= 0.95"));
    }
    if dev >= 0.05 {
        errs.push(format!("occupation curves deviate by {dev:.4} >= 0.05"));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        fail(errs.join("; "))
    }
}

/// A4: closed-form three-photon eigensystem vs numerical diagonalization of
/// the hopping block, within 1e-10.
fn a4() -> Check {
    let g_hz = 25e3;
    let (_, pairs) = three_photon_eigensystem(g_hz).map_err(|e| e.to_string())?;
    // hopping block J[k][k+1] = sqrt((3-k)(k+1)) over |3-k, k>
    let mut j = Array2::<f64>::zeros((4, 4));
    for k in 0..3 {
        let v = ((3 - k) as f64 * (k + 1) as f64).sqrt();
        j[[k, k + 1]] = v;
        j[[k + 1, k]] = v;
    }
    let h = j.mapv(|x| -TAU * g_hz * x);
    let (w, v) = h.eigh(UPLO::Lower).map_err(|e| e.to_string())?;
    // closed-form energies sorted ascending: -3, -1, +1, +3 in units of g
    let mut closed: Vec<(f64, Vec<C64>)> = pairs
        .iter()
        .map(|(e, psi)| {
            // flatten |3-k, k> amplitudes to the block basis
            let l = psi.layout().clone();
            let amps: Vec<C64> = (0..4)
                .map(|k| psi.amplitudes()[l.index_of(&[3 - k, k]).unwrap()])
                .collect();
            (*e, amps)
        })
        .collect();
    closed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut worst = 0.0f64;
    for (i, (e, amps)) in closed.iter().enumerate() {
        worst = worst.max((e - w[i]).abs() / (TAU * g_hz));
        // eigenvector match up to global sign
        let col: Vec<f64> = (0..4).map(|r| v[[r, i]]).collect();
        let dot: f64 = amps.iter().zip(&col).map(|(a, c)| a.re * c).sum();
        let sign = if dot >= 0.0 { 1.0 } else { -1.0 };
        for r in 0..4 {
            worst = worst.max((amps[r].re - sign * col[r]).abs());
        }
    }
    println!("    closed form vs numerical diagonalization: max defect {worst:.3e}");
    if worst >= 1e-10 {
        return fail(format!("eigensystem defect {worst:.3e} >= 1e-10"));
    }
    Ok(())
}

/// A5 (+ A9 charges on the same run): analytic multicomponent-cat law vs the
/// exact propagation from |30>|alpha=3>, and per-record branch fidelities.
fn a5_a9() -> (Check, Check) {
    let g_hz = 25e3;
    let g_ang = TAU * g_hz;
    let alpha = C64::new(3.0, 0.0);
    let layout = ModeLayout::from_specs(&[
        (labels::A_PLUS, 4, ModeRole::Optical),
        (labels::A_MINUS, 4, ModeRole::Optical),
        (labels::B, 54, ModeRole::Mechanical),
    ])
    .unwrap();
    let h = build_two_phonon_hamiltonian(g_hz, &layout).unwrap();
    let psi0 = fock_coherent(
        &layout,
        &[(labels::A_PLUS.to_string(), 3)],
        labels::B,
        alpha,
        1e-8,
    )
    .unwrap();

    let mut errs = Vec::new();
    let mut max_charge_drift = 0.0f64;
    for gt in [std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4] {
        let t = gt / g_ang;
        let grid = TimeGrid::with_tolerance(0.0, t, 5, 1e-11).unwrap();
        let mut traj = evolve_unitary(&h, &psi0, &grid).unwrap();

        let np = traj
            .record_observable("n_plus", &number(&layout, labels::A_PLUS).unwrap())
            .to_vec();
        let nm = traj
            .record_observable("n_minus", &number(&layout, labels::A_MINUS).unwrap())
            .to_vec();
        let nb = traj
            .record_observable("n_b", &number(&layout, labels::B).unwrap())
            .to_vec();
        for i in 0..np.len() {
            max_charge_drift = max_charge_drift
                .max((np[i] + nm[i] - (np[0] + nm[0])).abs())
                .max((2.0 * np[i] + nb[i] - (2.0 * np[0] + nb[0])).abs());
        }

        let numeric = traj.final_state().as_pure().unwrap().clone();
        let ana = analytic_cat_state(3, alpha, t, g_hz, &layout).unwrap();
        let f = numeric.overlap(&ana).unwrap().norm_sqr();
        println!("    gt = {gt:.4}: full-state infidelity {:.4e}", 1.0 - f);
        if f <= 1.0 - 1e-6 {
            errs.push(format!("gt={gt:.4}: F = {f:.6} <= 1 - 1e-6"));
        }

        let meas = &[labels::A_PLUS, labels::A_MINUS];
        let out_n =
            photon_number_measurement((&numeric).into(), meas, DEFAULT_PROB_FLOOR).unwrap();
        let out_a = photon_number_measurement((&ana).into(), meas, DEFAULT_PROB_FLOOR).unwrap();
        for o in &out_n {
            if let Some(a) = out_a.iter().find(|x| x.record == o.record) {
                let fb = fidelity(
                    (&o.conditional_state).into(),
                    (&a.conditional_state).into(),
                )
                .unwrap();
                println!(
                    "      record {:?}: branch infidelity {:.4e}",
                    o.record,
                    1.0 - fb
                );
                if fb <= 1.0 - 1e-8 {
                    errs.push(format!(
                        "gt={gt:.4} record {:?}: branch F = {fb:.8}",
                        o.record
                    ));
                }
            }
        }
    }

    let a5 = if errs.is_empty() {
        Ok(())
    } else {
        fail(errs.join("; "))
    };

    // A9 part 2: n+ + n- conservation of the detuned effective model
    let params = SystemParams::from_resonance(1e6, 5e6, 5e9, -25e3, 50e9).unwrap();
    let eff = EffectiveModel::from_params(&params, true).unwrap();
    let el = ModeLayout::from_specs(&[
        (labels::A_PLUS, 2, ModeRole::Optical),
        (labels::A_MINUS, 2, ModeRole::Optical),
        (labels::B, 6, ModeRole::Mechanical),
    ])
    .unwrap();
    let he = build_effective_hamiltonian(&eff, &el).unwrap();
    let p0 = fock_state(&el, &[1, 0, 0]).unwrap();
    let grid = TimeGrid::with_tolerance(0.0, 10e-6, 51, 1e-11).unwrap();
    let mut traj = evolve_time_dependent(&he, &p0, &grid, None).unwrap();
    let np = traj
        .record_observable("n_plus", &number(&el, labels::A_PLUS).unwrap())
        .to_vec();
    let nm = traj
        .record_observable("n_minus", &number(&el, labels::A_MINUS).unwrap())
        .to_vec();
    for i in 0..np.len() {
        max_charge_drift = max_charge_drift.max((np[i] + nm[i] - (np[0] + nm[0])).abs());
    }
    let max_norm_drift = traj.max_drift();
    println!(
        "    A9: max charge drift {max_charge_drift:.3e}, norm drift {max_norm_drift:.3e}"
    );
    let a9 = if max_charge_drift < 1e-8 {
        Ok(())
    } else {
        fail(format!("charge drift {max_charge_drift:.3e} >= 1e-8"))
    };
    (a5, a9)
}

/// A6: component counts for n in {1, 2, 3, 5}: the selected conditional state
/// fits n+1 coherent components with residual < 1e-3 and any n-component fit
/// leaves residual > 0.1.
fn a6() -> Check {
    let g_hz = 25e3;
    let g_ang = TAU * g_hz;
    let alpha = C64::new(3.0, 0.0);
    let mut errs = Vec::new();
    for n in [1usize, 2, 3, 5] {
        let db = 48 + 2 * n;
        let layout = ModeLayout::from_specs(&[
            (labels::A_PLUS, n + 1, ModeRole::Optical),
            (labels::A_MINUS, n + 1, ModeRole::Optical),
            (labels::B, db, ModeRole::Mechanical),
        ])
        .unwrap();
        let h = build_two_phonon_hamiltonian(g_hz, &layout).unwrap();
        let psi0 = fock_coherent(
            &layout,
            &[(labels::A_PLUS.to_string(), n)],
            labels::B,
            alpha,
            1e-8,
        )
        .unwrap();
        let gt = std::f64::consts::PI / (n + 1) as f64;
        let grid = TimeGrid::with_tolerance(0.0, gt / g_ang, 2, 1e-8).unwrap();
        let traj = evolve_unitary(&h, &psi0, &grid).unwrap();
        let state = traj.final_state().as_pure().unwrap().clone();
        let outcomes = photon_number_measurement(
            (&state).into(),
            &[labels::A_PLUS, labels::A_MINUS],
            DEFAULT_PROB_FLOOR,
        )
        .unwrap();
        let sel = &outcomes[0];
        let angles = component_angles(n, gt, 0.05);
        let full = cat_component_fit((&sel.conditional_state).into(), &angles, 3.0).unwrap();
        let under =
            cat_component_fit((&sel.conditional_state).into(), &angles[..n], 3.0).unwrap();
        println!(
            "    n = {n}: record {:?} (p = {:.4}), residual({} comp) = {:.4e}, residual({n} comp) = {:.4e}",
            sel.record,
            sel.probability,
            n + 1,
            full.residual,
            under.residual
        );
        if full.residual >= 1e-3 {
            errs.push(format!(
                "n={n}: (n+1)-component residual {:.3e} >= 1e-3",
                full.residual
            ));
        }
        if under.residual <= 0.1 {
            errs.push(format!(
                "n={n}: n-component residual {:.3e} <= 0.1",
                under.residual
            ));
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        fail(errs.join("; "))
    }
}

/// Shared default robustness run (backs A7 and A8).
fn robustness_summary() -> Result<Summary, String> {
    let cfg = ExperimentConfig::load("{}", Some("robustness"), &[]).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_experiment(&cfg, dir.path()).map_err(|e| e.to_string())
}

/// A7: thermal sweep n_th <= 5 at kappa = 0 keeps probability 1 within 1e-6
/// and fidelity above 0.97.
fn a7(summary: &Summary) -> Check {
    let min_f = summary["thermal_min_fidelity"];
    let min_p = summary["thermal_min_sector_prob"];
    println!("    thermal sweep: min fidelity {min_f:.6}, min probability {min_p:.9}");
    let mut errs = Vec::new();
    if (min_p - 1.0).abs() >= 1e-6 {
        errs.push(format!("probability {min_p:.9} differs from 1 by >= 1e-6"));
    }
    if min_f <= 0.97 {
        errs.push(format!("fidelity {min_f:.6} <= 0.97"));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        fail(errs.join("; "))
    }
}

/// A8: loss sweep kappa in [0, g] at n_th = 0 keeps every full-sector
/// conditional fidelity above 0.99 with strictly decreasing probability.
fn a8(summary: &Summary) -> Check {
    let min_f = summary["loss_min_fidelity"];
    let monotone = summary["loss_prob_strictly_decreasing"];
    println!("    loss sweep: min fidelity {min_f:.6}, strictly decreasing = {monotone}");
    let mut errs = Vec::new();
    if min_f <= 0.99 {
        errs.push(format!("fidelity {min_f:.6} <= 0.99"));
    }
    if monotone != 1.0 {
        errs.push("sector probability is not strictly decreasing in kappa".into());
    }
    if errs.is_empty() {
        Ok(())
    } else {
        fail(errs.join("; "))
    }
}

/// A10: identical configs reproduce byte-identical data tables.
fn a10() -> Check {
    let sets = vec![
        "grid.t_end=2e-6".to_string(),
        "grid.n_samples=50".to_string(),
    ];
    let cfg = ExperimentConfig::load("{}", Some("two-phonon"), &sets).map_err(|e| e.to_string())?;
    let cat_sets = vec![
        "n_photons=1".to_string(),
        "mech_dim=36".to_string(),
        "snapshot_gt=[1.5707963267948966]".to_string(),
        "grid.n_samples=20".to_string(),
        "wigner={\"x_min\":-5.0,\"x_max\":5.0,\"p_min\":-5.0,\"p_max\":5.0,\"nx\":41,\"np\":41}"
            .to_string(),
    ];
    let cat_cfg = ExperimentConfig::load("{}", Some("cat"), &cat_sets).map_err(|e| e.to_string())?;

    for cfg in [&cfg, &cat_cfg] {
        let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
        run_experiment(cfg, d1.path()).map_err(|e| e.to_string())?;
        run_experiment(cfg, d2.path()).map_err(|e| e.to_string())?;
        let mut names: Vec<String> = std::fs::read_dir(d1.path())
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != "runtime.json")
            .collect();
        names.sort();
        if names.len() < 4 {
            return fail(format!("{} data files only: {names:?}", names.len()));
        }
        for name in &names {
            let b1 = std::fs::read(d1.path().join(name)).map_err(|e| e.to_string())?;
            let b2 = std::fs::read(d2.path().join(name)).map_err(|e| e.to_string())?;
            if b1 != b2 {
                return fail(format!("{} ({name}) differs between reruns", cfg.experiment));
            }
        }
        println!(
            "    {}: {} files byte-identical across reruns",
            cfg.experiment,
            names.len()
        );
    }
    Ok(())
}

// ------------------------------------------------------------------ driver

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Check)> = Vec::new();
    let run = |name: &'static str, check: Check, out: &mut Vec<(&str, Check)>| {
        out.push((name, check));
    };

    println!("A1: supermode transform structure");
    let t = Instant::now();
    run("A1", a1(), &mut results);
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A2/A3: two-phonon generation (default run)");
    let t = Instant::now();
    let tp = two_phonon_summary();
    match &tp {
        Ok(s) => {
            run("A2", a2(s), &mut results);
            run("A3", a3(s), &mut results);
        }
        Err(e) => {
            run("A2", fail(format!("run failed: {e}")), &mut results);
            run("A3", fail(format!("run failed: {e}")), &mut results);
        }
    }
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A4: three-photon eigensystem oracle");
    let t = Instant::now();
    run("A4", a4(), &mut results);
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A5/A9: analytic cat law and conservation");
    let t = Instant::now();
    let (a5r, a9r) = a5_a9();
    run("A5", a5r, &mut results);
    run("A9", a9r, &mut results);
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A6: component counts for n in {{1, 2, 3, 5}}");
    let t = Instant::now();
    run("A6", a6(), &mut results);
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A7/A8: robustness sweeps (default run)");
    let t = Instant::now();
    let rb = robustness_summary();
    match &rb {
        Ok(s) => {
            run("A7", a7(s), &mut results);
            run("A8", a8(s), &mut results);
        }
        Err(e) => {
            run("A7", fail(format!("run failed: {e}")), &mut results);
            run("A8", fail(format!("run failed: {e}")), &mut results);
        }
    }
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    println!("A10: determinism");
    let t = Instant::now();
    run("A10", a10(), &mut results);
    println!("    [{:.1} s]", t.elapsed().as_secs_f64());

    results.sort_by_key(|(name, _)| name.trim_start_matches('A').parse::<u32>().unwrap());
    println!("\n==== acceptance report ====");
    let mut failures: BTreeMap<&str, String> = BTreeMap::new();
    for (name, check) in &results {
        match check {
            Ok(()) => println!("{name}: PASS"),
            Err(msg) => {
                println!("{name}: FAIL - {msg}");
                failures.insert(name, msg.clone());
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} acceptance criteria failed: {:?}",
        failures.len(),
        failures.keys().collect::<Vec<_>>()
    );
}
