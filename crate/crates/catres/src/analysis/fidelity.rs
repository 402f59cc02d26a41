//! Uhlmann fidelity with pure-state shortcuts.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use super::AnalysisError;
use crate::hilbert::{MixedState, PureState, StateView};

fn pure_mixed(psi: &PureState, rho: &MixedState) -> f64 {
    let v = psi.amplitudes();
    let rv = rho.rho().dot(v);
    v.iter()
        .zip(rv.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

fn matrix_sqrt(m: &Array2<C64>) -> Result<Array2<C64>, AnalysisError> {
    let (w, v) = m.eigh(UPLO::Lower)?;
    let d = m.nrows();
    let mut out = Array2::<C64>::zeros((d, d));
    for (k, &lam) in w.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = v.column(k);
        for i in 0..d {
            for j in 0..d {
                out[[i, j]] += C64::new(s, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok(out)
}

/// `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`; reduces to `|<psi|phi>|^2` for
/// pure pairs and `<psi|sigma|psi>` for a pure/mixed pair.
pub fn fidelity(a: StateView<'_>, b: StateView<'_>) -> Result<f64, AnalysisError> {
    if *a.layout() != *b.layout() {
        return Err(AnalysisError::Hilbert(
            crate::hilbert::HilbertError::LayoutMismatch,
        ));
    }
    let f = match (&a, &b) {
        (StateView::Pure(p), StateView::Pure(q)) => p.overlap(q)?.norm_sqr(),
        (StateView::Pure(p), StateView::Mixed(m)) | (StateView::Mixed(m), StateView::Pure(p)) => {
            pure_mixed(p, m)
        }
        (StateView::Mixed(m), StateView::Mixed(n)) => {
            let s = matrix_sqrt(m.rho())?;
            let inner = s.dot(n.rho()).dot(&s);
            let (w, _) = inner.eigh(UPLO::Lower)?;
            let tr: f64 = w.iter().map(|&lam| lam.max(0.0).sqrt()).sum();
            tr * tr
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fock_state, ModeLayout, ModeRole};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::sync::Arc;

    fn single_mode(dim: usize) -> Arc<ModeLayout> {
        ModeLayout::from_specs(&[("b", dim, ModeRole::Mechanical)]).unwrap()
    }

    #[test]
    fn identical_and_orthogonal() {
        let l = single_mode(30);
        let a = coherent_state(&l, "b", C64::new(3.0, 0.0), 1e-6).unwrap();
        assert_relative_eq!(
            fidelity((&a).into(), (&a).into()).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        let f0 = fock_state(&l, &[0]).unwrap();
        let f1 = fock_state(&l, &[1]).unwrap();
        assert_abs_diff_eq!(fidelity((&f0).into(), (&f1).into()).unwrap(), 0.0, epsilon = 1e-12);
        // same answers through the mixed pathways
        let am = a.to_mixed();
        assert_relative_eq!(
            fidelity((&a).into(), (&am).into()).unwrap(),
            1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            fidelity((&am).into(), (&am).into()).unwrap(),
            1.0,
            max_relative = 1e-7
        );
    }

    #[test]
    fn rotated_coherent_closed_form() {
        // |<alpha|beta>|^2 = e^{-|alpha-beta|^2}
        let l = single_mode(40);
        let alpha = C64::new(3.0, 0.0);
        let beta = alpha * C64::new(0.0, 1.0); // 3 e^{i pi/2}
        let a = coherent_state(&l, "b", alpha, 1e-10).unwrap();
        let b = coherent_state(&l, "b", beta, 1e-10).unwrap();
        let f = fidelity((&a).into(), (&b).into()).unwrap();
        assert_relative_eq!(f, (-18.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn uhlmann_for_commuting_mixtures() {
        // diagonal states: F = (sum sqrt(p_i q_i))^2
        let l = single_mode(3);
        let mk = |p: [f64; 3]| {
            let mut rho = ndarray::Array2::<C64>::zeros((3, 3));
            for i in 0..3 {
                rho[[i, i]] = C64::new(p[i], 0.0);
            }
            crate::hilbert::MixedState::new(l.clone(), rho).unwrap()
        };
        let r = mk([0.5, 0.3, 0.2]);
        let s = mk([0.2, 0.5, 0.3]);
        let expect: f64 = (0.5f64 * 0.2).sqrt() + (0.3f64 * 0.5).sqrt() + (0.2f64 * 0.3).sqrt();
        assert_relative_eq!(
            fidelity((&r).into(), (&s).into()).unwrap(),
            expect * expect,
            max_relative = 1e-10
        );
    }
}
