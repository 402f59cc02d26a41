//! Closed-form oracles: the 3-photon eigensystem, the analytic
//! multicomponent cat state it generates, and coherent-component fitting.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;
use std::sync::Arc;

use super::AnalysisError;
use crate::hilbert::{
    coherent_state, fock_coherent, ModeLayout, ModeRole, PureState, StateView,
};
use crate::model::labels;
use crate::TAU;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Closed-form eigenpairs of `-g (a+^dag a- + h.c.)` restricted to the
/// 3-photon subspace: `|psi_pm>` with `E = -+ 3 hbar g` and `|phi_pm>` with
/// `E = -+ hbar g`, amplitudes `(1, ±sqrt3, sqrt3, ±1)/(2 sqrt2)` and
/// `(sqrt3, ±1, -1, -+sqrt3)/(2 sqrt2)` over `{|30>, |21>, |12>, |03>}`.
///
/// Returns angular eigenvalues; states live on a two-mode layout
/// `(a+ dim 4, a- dim 4)`.
pub fn three_photon_eigensystem(
    g_hz: f64,
) -> Result<(Arc<ModeLayout>, Vec<(f64, PureState)>), AnalysisError> {
    let layout = ModeLayout::from_specs(&[
        (labels::A_PLUS, 4, ModeRole::Optical),
        (labels::A_MINUS, 4, ModeRole::Optical),
    ])?;
    let g_ang = TAU * g_hz;
    let s = 1.0 / (2.0 * 2f64.sqrt());
    // (eigenvalue / (-hbar g), amplitudes over |30>,|21>,|12>,|03>)
    let table: [(f64, [f64; 4]); 4] = [
        (3.0, [s, SQRT3 * s, SQRT3 * s, s]),          // |psi+>, E = -3 hbar g
        (-3.0, [s, -SQRT3 * s, SQRT3 * s, -s]),       // |psi->, E = +3 hbar g
        (1.0, [SQRT3 * s, s, -s, -SQRT3 * s]),        // |phi+>, E = -hbar g
        (-1.0, [SQRT3 * s, -s, -s, SQRT3 * s]),       // |phi->, E = +hbar g
    ];
    let mut out = Vec::with_capacity(4);
    for (eta, amps) in table {
        let mut v = Array1::<C64>::zeros(layout.total_dim());
        for (k, &a) in amps.iter().enumerate() {
            let idx = layout.index_of(&[3 - k, k])?;
            v[idx] = C64::new(a, 0.0);
        }
        out.push((-eta * g_ang, PureState::from_normalized(layout.clone(), v)?));
    }
    Ok((layout, out))
}

/// Tensors a coherent state onto a mode that is currently in vacuum.
pub fn with_coherent_mode(
    psi: &PureState,
    mode: &str,
    alpha: C64,
    tail_tol: f64,
) -> Result<PureState, AnalysisError> {
    let layout = psi.layout().clone();
    let which = layout.mode_index(mode)?;
    let coh = coherent_state(&layout, mode, alpha, tail_tol)?;
    let dim = layout.modes()[which].dim;
    let stride: usize = layout.modes()[which + 1..].iter().map(|m| m.dim).product();
    // local coherent amplitudes
    let local: Vec<C64> = (0..dim).map(|n| coh.amplitudes()[n * stride]).collect();
    let mut v = Array1::<C64>::zeros(layout.total_dim());
    for (i, amp) in psi.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        if layout.occupations_of(i)[which] != 0 {
            return Err(AnalysisError::ModeNotVacuum(mode.to_string()));
        }
        for (n, &c) in local.iter().enumerate() {
            v[i + n * stride] += amp * c;
        }
    }
    Ok(PureState::new(layout, v)?)
}

/// Closed-form state at time `t` for the initial state `|n,0>|alpha>` under
/// the resonant two-phonon Hamiltonian, in the rotating frame of the
/// numerical propagation: each optical eigenstate branch carries the phase
/// `exp(i lambda_j t (n+ - n- + 1/2))` and a mechanical coherent state
/// rotated to `alpha e^{i lambda_j t}` with `lambda_j = eta_j g`
/// (`eta_j` the hopping-block eigenvalue in units of g).
///
/// Valid for n in {1, 3}; this closed form is a large-|alpha| limit of the
/// exact dynamics.
pub fn analytic_cat_state(
    n: usize,
    alpha: C64,
    t: f64,
    g_hz: f64,
    layout: &Arc<ModeLayout>,
) -> Result<PureState, AnalysisError> {
    // eigenvectors over the basis |n-k, k>, k = 0..n, with hopping eigenvalue
    // eta (the block Hamiltonian is -g * hopping)
    let eigs: Vec<(f64, Vec<f64>)> = match n {
        1 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![(1.0, vec![s, s]), (-1.0, vec![s, -s])]
        }
        3 => {
            let s = 1.0 / (2.0 * 2f64.sqrt());
            vec![
                (3.0, vec![s, SQRT3 * s, SQRT3 * s, s]),
                (-3.0, vec![s, -SQRT3 * s, SQRT3 * s, -s]),
                (1.0, vec![SQRT3 * s, s, -s, -SQRT3 * s]),
                (-1.0, vec![SQRT3 * s, -s, -s, SQRT3 * s]),
            ]
        }
        other => return Err(AnalysisError::UnsupportedCatOrder(other)),
    };

    let g_ang = TAU * g_hz;
    let mut v = Array1::<C64>::zeros(layout.total_dim());
    for (eta, c) in &eigs {
        let lam = eta * g_ang;
        let rotated = alpha * C64::from_polar(1.0, lam * t);
        for k in 0..=n {
            let dn = (n - k) as f64 - k as f64;
            let phase = C64::from_polar(1.0, lam * t * (dn + 0.5));
            let branch = fock_coherent(
                layout,
                &[
                    (labels::A_PLUS.to_string(), n - k),
                    (labels::A_MINUS.to_string(), k),
                ],
                labels::B,
                rotated,
                crate::hilbert::DEFAULT_TAIL_TOL,
            )?;
            let coeff = C64::new(c[0] * c[k], 0.0) * phase;
            v.scaled_add(coeff, branch.amplitudes());
        }
    }
    Ok(PureState::new(layout.clone(), v)?)
}

/// Least-squares decomposition of a single-mode state onto coherent
/// components `|r e^{i theta_k}>`.
#[derive(Debug, Clone)]
pub struct CatDecomposition {
    /// `(coefficient, coherent label alpha_k)` per candidate angle.
    pub components: Vec<(C64, C64)>,
    /// `1 - ||projection onto the coherent span||^2`, in [0, 1].
    pub residual: f64,
}

/// Projects the state onto the span of `|r e^{i theta_k}>` and reports the
/// orthogonal residual. Errors when two candidates overlap by more than 0.99
/// (Gram matrix too ill-conditioned for honest component counting).
pub fn cat_component_fit(
    state: StateView<'_>,
    angles: &[f64],
    radius: f64,
) -> Result<CatDecomposition, AnalysisError> {
    if angles.is_empty() {
        return Err(AnalysisError::EmptyAngles);
    }
    let layout = state.layout().clone();
    if layout.n_modes() != 1 {
        return Err(AnalysisError::NotSingleMode(layout.n_modes()));
    }
    let mode = layout.modes()[0].label.clone();
    let d = layout.total_dim();
    let k = angles.len();

    let alphas: Vec<C64> = angles
        .iter()
        .map(|&th| C64::from_polar(radius, th))
        .collect();
    let mut c_mat = Array2::<C64>::zeros((d, k));
    for (j, &a) in alphas.iter().enumerate() {
        let coh = coherent_state(&layout, &mode, a, crate::hilbert::DEFAULT_TAIL_TOL)?;
        for i in 0..d {
            c_mat[[i, j]] = coh.amplitudes()[i];
        }
    }
    let c_dag = c_mat.t().mapv(|z| z.conj());
    let gram = c_dag.dot(&c_mat);
    for i in 0..k {
        for j in 0..k {
            if i != j && gram[[i, j]].norm() > 0.99 {
                return Err(AnalysisError::IllConditioned {
                    overlap: gram[[i, j]].norm(),
                });
            }
        }
    }
    let gram_inv = gram.inv()?;

    let (coeffs, residual) = match state {
        StateView::Pure(p) => {
            let v = c_dag.dot(p.amplitudes());
            let c = gram_inv.dot(&v);
            let captured: f64 = v
                .iter()
                .zip(c.iter())
                .map(|(vi, ci)| (vi.conj() * ci).re)
                .sum();
            let norm2: f64 = p.amplitudes().iter().map(|z| z.norm_sqr()).sum();
            (c, 1.0 - captured / norm2)
        }
        StateView::Mixed(m) => {
            // residual = 1 - Tr(rho P), P = C G^{-1} C^dag; coefficients taken
            // from the dominant eigenvector
            let b = c_dag.dot(m.rho()).dot(&c_mat);
            let captured = gram_inv
                .dot(&b)
                .diag()
                .iter()
                .map(|z| z.re)
                .sum::<f64>()
                / m.trace().re;
            let (w, vecs) = m.rho().eigh(UPLO::Lower)?;
            let (kmax, _) = w
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .expect("nonempty spectrum");
            let dom = vecs.column(kmax).to_owned();
            let c = gram_inv.dot(&c_dag.dot(&dom));
            (c, 1.0 - captured)
        }
    };
    Ok(CatDecomposition {
        components: coeffs.iter().cloned().zip(alphas).collect(),
        residual: residual.max(0.0),
    })
}
