//! Schrodinger-picture propagation of pure states.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::ode::integrate;
use super::{DynamicsError, TimeGrid, Trajectory, TrajectoryState};
use crate::hilbert::{OperatorMatrix, PureState};
use crate::model::TimeDependentHamiltonian;

const MINUS_I: C64 = C64::new(0.0, -1.0);

fn hermiticity_tol(h: &OperatorMatrix) -> f64 {
    1e-10 * h.max_abs().max(1.0)
}

fn check_hermitian(h: &OperatorMatrix) -> Result<(), DynamicsError> {
    let tol = hermiticity_tol(h);
    if !h.is_hermitian(tol) {
        let defect = (h.entries() - &h.entries().t().mapv(|z| z.conj()))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        return Err(DynamicsError::NonHermitian { defect, tol });
    }
    Ok(())
}

fn collect_pure(
    layout: &std::sync::Arc<crate::hilbert::ModeLayout>,
    times: Vec<f64>,
) -> (Trajectory, impl FnMut(&mut Trajectory, &Array1<C64>)) {
    let layout = layout.clone();
    let traj = Trajectory::new(times);
    let push = move |traj: &mut Trajectory, y: &Array1<C64>| {
        let drift = (y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
        let state = PureState::from_normalized(layout.clone(), y.clone())
            .expect("dimension fixed by the integrator");
        traj.push(TrajectoryState::Pure(state), drift);
    };
    (traj, push)
}

/// Propagates `i psi' = H psi` (hbar = 1, H in angular units) through the
/// grid samples.
pub fn evolve_unitary(
    h: &OperatorMatrix,
    psi0: &PureState,
    grid: &TimeGrid,
) -> Result<Trajectory, DynamicsError> {
    check_hermitian(h)?;
    let times = grid.times();
    let (mut traj, mut push) = collect_pure(psi0.layout(), times.clone());
    let hm = h.entries();
    integrate(
        |_t, y: &Array1<C64>| hm.dot(y).mapv_into(|z| MINUS_I * z),
        psi0.amplitudes(),
        &times,
        grid.rel_tol,
        None,
        |_, _, y| push(&mut traj, y),
    )?;
    Ok(traj)
}

/// Largest admissible substep for a term list: `1/(20 * f_max)`.
pub fn required_substep(h: &TimeDependentHamiltonian) -> f64 {
    let f_max = h.max_frequency_hz();
    if f_max > 0.0 {
        1.0 / (20.0 * f_max)
    } else {
        f64::INFINITY
    }
}

/// Time-ordered propagation under `H(t) = sum_k amp_k e^{i 2 pi f_k t} Op_k + h.c.`.
/// `substep` caps the integrator step; it must not exceed `1/(20 * f_max)`.
/// Pass `None` to use that bound directly.
pub fn evolve_time_dependent(
    h: &TimeDependentHamiltonian,
    psi0: &PureState,
    grid: &TimeGrid,
    substep: Option<f64>,
) -> Result<Trajectory, DynamicsError> {
    let required = required_substep(h);
    let substep = substep.unwrap_or(required);
    if substep > required {
        return Err(DynamicsError::SubstepTooCoarse {
            substep,
            f_max: h.max_frequency_hz(),
            required,
        });
    }

    // Precompute each term's matrix and its dagger so the RHS is two
    // matrix-vector products per term and stage.
    struct Term {
        op: Array2<C64>,
        op_dag: Array2<C64>,
        amp: C64,
        freq_hz: f64,
    }
    let terms: Vec<Term> = h
        .terms()
        .iter()
        .map(|t| Term {
            op: t.op.entries().clone(),
            op_dag: t.op.entries().t().mapv(|z| z.conj()),
            amp: t.amplitude,
            freq_hz: t.frequency_hz,
        })
        .collect();

    let times = grid.times();
    let (mut traj, mut push) = collect_pure(psi0.layout(), times.clone());
    integrate(
        |t, y: &Array1<C64>| {
            let mut dy: Array1<C64> = Array1::zeros(y.raw_dim());
            for term in &terms {
                let phase = term.amp * C64::from_polar(1.0, crate::TAU * term.freq_hz * t);
                dy.scaled_add(MINUS_I * phase, &term.op.dot(y));
                dy.scaled_add(MINUS_I * phase.conj(), &term.op_dag.dot(y));
            }
            dy
        },
        psi0.amplitudes(),
        &times,
        grid.rel_tol,
        Some(substep),
        |_, _, y| push(&mut traj, y),
    )?;
    Ok(traj)
}
