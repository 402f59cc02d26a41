//! Occupation expectation series and number distributions.

use super::AnalysisError;
use crate::dynamics::Trajectory;
use crate::hilbert::{number, StateView};

/// `<n_mode>(t)` along a trajectory.
pub fn occupation_series(traj: &Trajectory, mode: &str) -> Result<Vec<f64>, AnalysisError> {
    let first = traj.states.first().ok_or(AnalysisError::EmptyTrajectory)?;
    let layout = match first {
        crate::dynamics::TrajectoryState::Pure(p) => p.layout().clone(),
        crate::dynamics::TrajectoryState::Mixed(m) => m.layout().clone(),
    };
    let op = number(&layout, mode)?;
    Ok(traj.states.iter().map(|s| s.expect(&op)).collect())
}

/// Marginal photon/phonon-number distribution of one mode; sums to the state
/// norm (1 within 1e-10 for normalized input).
pub fn number_distribution(state: StateView<'_>, mode: &str) -> Result<Vec<f64>, AnalysisError> {
    let layout = state.layout().clone();
    let which = layout.mode_index(mode)?;
    let dim = layout.modes()[which].dim;
    let mut dist = vec![0.0; dim];
    match state {
        StateView::Pure(p) => {
            for (i, amp) in p.amplitudes().iter().enumerate() {
                let w = amp.norm_sqr();
                if w > 0.0 {
                    dist[layout.occupations_of(i)[which]] += w;
                }
            }
        }
        StateView::Mixed(m) => {
            for i in 0..layout.total_dim() {
                dist[layout.occupations_of(i)[which]] += m.rho()[[i, i]].re;
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fock_state, ModeLayout, ModeRole};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;

    #[test]
    fn vacuum_distribution() {
        let l = ModeLayout::from_specs(&[("b", 5, ModeRole::Mechanical)]).unwrap();
        let psi = fock_state(&l, &[0]).unwrap();
        let d = number_distribution((&psi).into(), "b").unwrap();
        assert_abs_diff_eq!(d[0], 1.0, epsilon = 1e-12);
        assert!(d[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn coherent_is_poisson_mean_nine() {
        let l = ModeLayout::from_specs(&[("b", 40, ModeRole::Mechanical)]).unwrap();
        let psi = coherent_state(&l, "b", C64::new(3.0, 0.0), 1e-10).unwrap();
        let d = number_distribution((&psi).into(), "b").unwrap();
        let mut w = (-9.0f64).exp();
        for (n, &p) in d.iter().enumerate() {
            assert_abs_diff_eq!(p, w, epsilon = 1e-8);
            w *= 9.0 / (n + 1) as f64;
        }
        let total: f64 = d.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }
}
