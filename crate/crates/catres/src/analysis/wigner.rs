//! Wigner function via the displaced-parity form
//! `W(beta) = (2/pi) Tr[rho D(beta) P D(beta)^dag]`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::AnalysisError;
use crate::hilbert::StateView;

pub const WIGNER_CONVENTION: &str =
    "W(x,p) = (2/pi) Tr[rho D(beta) P D(beta)^dag], beta = x + i p, P = (-1)^n";

/// Rectangular phase-space grid specification.
#[derive(Debug, Clone, Copy)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl WignerGridSpec {
    /// 201 x 201 over [-5.5, 5.5]^2: resolves the fringes of |alpha| = 3 cats.
    pub fn default_for_alpha3() -> Self {
        Self {
            x_min: -5.5,
            x_max: 5.5,
            p_min: -5.5,
            p_max: 5.5,
            nx: 201,
            np: 201,
        }
    }

    pub fn symmetric(half_width: f64, n: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `values[[i, j]] = W(x_axis[j], p_axis[i])`.
    pub values: Array2<f64>,
    /// Grid quadrature of the total integral.
    pub total_mass: f64,
    /// Set when the grid captures less than 99.9% of the state's mass.
    pub mass_warning: bool,
    pub convention: &'static str,
}

fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
    let step = (max - min) / (n - 1) as f64;
    (0..n).map(|i| min + step * i as f64).collect()
}

/// `u = D(beta)^dag v` extended past the truncation:
/// `u_n = sum_{m<d} conj(D_{mn}(beta)) v_m` for `n < n_out`, where `n_out`
/// gives the displaced state headroom so the parity sum converges. Matrix
/// elements come from the Laguerre recurrence along each diagonal offset:
/// for k = min(m, n) and o = |m - n|,
/// `D_{k+o,k} = e^{-x/2} beta^o s_k L_k^{(o)}(x)` and
/// `D_{k,k+o} = e^{-x/2} (-conj(beta))^o s_k L_k^{(o)}(x)`,
/// with `x = |beta|^2` and `s_k = 1/sqrt((k+1)...(k+o))`.
fn displaced_amplitudes(v: &Array1<C64>, beta: C64, n_out: usize) -> Array1<C64> {
    let d = v.len();
    let x = beta.norm_sqr();
    let pref = (-x / 2.0).exp();
    let mut u = Array1::<C64>::zeros(n_out);

    for o in 0..n_out {
        let bp = beta.powu(o as u32);
        let bm = (-beta.conj()).powu(o as u32);
        let mut l_prev = 0.0f64;
        let mut l_cur = 1.0f64; // L_0^{(o)} = 1
        let mut s = 1.0f64;
        for j in 1..=o {
            s /= (j as f64).sqrt();
        }
        let mut s_k = s;
        // upper part (col = k+o): rows k < d contribute to u[k+o];
        // lower part (row = k+o < d): contribute to u[k]
        let k_max = d.min(n_out.saturating_sub(o));
        let k_max_lower = d.saturating_sub(o);
        for k in 0..k_max.max(k_max_lower) {
            let val = pref * s_k * l_cur;
            if k < d && k + o < n_out {
                // D_{k, k+o} entry (row k, col k+o)
                u[k + o] += (bm * val).conj() * v[k];
            }
            if o > 0 && k + o < d && k < n_out {
                // D_{k+o, k} entry (row k+o, col k)
                u[k] += (bp * val).conj() * v[k + o];
            }
            let kf = k as f64;
            let l_next = ((2.0 * kf + 1.0 + o as f64 - x) * l_cur - (kf + o as f64) * l_prev)
                / (kf + 1.0);
            l_prev = l_cur;
            l_cur = l_next;
            s_k *= ((kf + 1.0) / (kf + 1.0 + o as f64)).sqrt();
        }
    }
    u
}

/// Evaluates the Wigner function of a single-mode state on the grid.
pub fn wigner(state: StateView<'_>, spec: &WignerGridSpec) -> Result<WignerGrid, AnalysisError> {
    let layout = state.layout();
    if layout.n_modes() != 1 {
        return Err(AnalysisError::NotSingleMode(layout.n_modes()));
    }

    // spectral decomposition: W = (2/pi) sum_k w_k sum_n (-1)^n |(D^dag v_k)_n|^2
    let comps: Vec<(f64, Array1<C64>)> = match state {
        StateView::Pure(p) => vec![(1.0, p.amplitudes().clone())],
        StateView::Mixed(m) => {
            let (w, v) = m.rho().eigh(UPLO::Lower)?;
            w.iter()
                .enumerate()
                .filter(|(_, &lam)| lam > 1e-12)
                .map(|(k, &lam)| (lam, v.column(k).to_owned()))
                .collect()
        }
    };

    let x_axis = axis(spec.x_min, spec.x_max, spec.nx);
    let p_axis = axis(spec.p_min, spec.p_max, spec.np);

    let rows: Vec<Vec<f64>> = p_axis
        .par_iter()
        .map(|&p| {
            x_axis
                .iter()
                .map(|&x| {
                    let beta = C64::new(x, p);
                    let b2 = beta.norm_sqr();
                    let dim = comps[0].1.len();
                    // headroom so the displaced state's parity sum converges
                    let n_out = dim + (b2 + 8.0 * b2.sqrt() + 12.0).ceil() as usize;
                    let mut w = 0.0;
                    for (lam, v) in &comps {
                        let u = displaced_amplitudes(v, beta, n_out);
                        let parity: f64 = u
                            .iter()
                            .enumerate()
                            .map(|(n, z)| if n % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
                            .sum();
                        w += lam * parity;
                    }
                    w * std::f64::consts::FRAC_2_PI
                })
                .collect()
        })
        .collect();

    let mut values = Array2::<f64>::zeros((spec.np, spec.nx));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, w) in row.into_iter().enumerate() {
            values[[i, j]] = w;
        }
    }

    let dx = (spec.x_max - spec.x_min) / (spec.nx - 1) as f64;
    let dp = (spec.p_max - spec.p_min) / (spec.np - 1) as f64;
    let total_mass = values.sum() * dx * dp;
    Ok(WignerGrid {
        x_axis,
        p_axis,
        values,
        total_mass,
        mass_warning: total_mass < 0.999,
        convention: WIGNER_CONVENTION,
    })
}
