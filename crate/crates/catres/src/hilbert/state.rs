//! Pure and mixed states on a mode layout.

use ndarray::{Array1, Array2};
use std::sync::Arc;

use super::{C64, HilbertError, ModeLayout};

pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// State vector on a [`ModeLayout`]; unit norm after any normalizing constructor.
#[derive(Debug, Clone)]
pub struct PureState {
    layout: Arc<ModeLayout>,
    amplitudes: Array1<C64>,
}

impl PureState {
    /// Normalizing constructor.
    pub fn new(layout: Arc<ModeLayout>, amplitudes: Array1<C64>) -> Result<Self, HilbertError> {
        if amplitudes.len() != layout.total_dim() {
            return Err(HilbertError::LayoutMismatch);
        }
        let norm = vec_norm(&amplitudes);
        if norm < 1e-14 {
            return Err(HilbertError::NotNormalizable(norm));
        }
        Ok(Self {
            layout,
            amplitudes: amplitudes.mapv(|z| z / norm),
        })
    }

    /// Wraps an already-normalized vector without rescaling.
    pub fn from_normalized(
        layout: Arc<ModeLayout>,
        amplitudes: Array1<C64>,
    ) -> Result<Self, HilbertError> {
        if amplitudes.len() != layout.total_dim() {
            return Err(HilbertError::LayoutMismatch);
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &Arc<ModeLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }

    pub fn overlap(&self, other: &Self) -> Result<C64, HilbertError> {
        if *self.layout != *other.layout {
            return Err(HilbertError::LayoutMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_mixed(&self) -> MixedState {
        let n = self.amplitudes.len();
        let mut rho = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                rho[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        MixedState {
            layout: self.layout.clone(),
            rho,
        }
    }
}

/// Density matrix on a [`ModeLayout`].
#[derive(Debug, Clone)]
pub struct MixedState {
    layout: Arc<ModeLayout>,
    rho: Array2<C64>,
}

impl MixedState {
    pub fn new(layout: Arc<ModeLayout>, rho: Array2<C64>) -> Result<Self, HilbertError> {
        let d = layout.total_dim();
        if rho.shape() != [d, d] {
            return Err(HilbertError::LayoutMismatch);
        }
        Ok(Self { layout, rho })
    }

    pub fn layout(&self) -> &Arc<ModeLayout> {
        &self.layout
    }

    pub fn rho(&self) -> &Array2<C64> {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().iter().sum()
    }

    pub fn normalized(&self) -> Result<Self, HilbertError> {
        let tr = self.trace().re;
        if tr < 1e-14 {
            return Err(HilbertError::NotNormalizable(tr));
        }
        Ok(Self {
            layout: self.layout.clone(),
            rho: self.rho.mapv(|z| z / tr),
        })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.rho.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[[i, j]] - self.rho[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        // Tr(rho * op)
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rho.nrows() {
            for k in 0..self.rho.ncols() {
                acc += self.rho[[i, k]] * op[[k, i]];
            }
        }
        acc
    }
}

/// Borrowed view over either state representation.
#[derive(Debug, Clone, Copy)]
pub enum StateView<'a> {
    Pure(&'a PureState),
    Mixed(&'a MixedState),
}

impl<'a> StateView<'a> {
    pub fn layout(&self) -> &Arc<ModeLayout> {
        match self {
            StateView::Pure(p) => p.layout(),
            StateView::Mixed(m) => m.layout(),
        }
    }
}

impl<'a> From<&'a PureState> for StateView<'a> {
    fn from(p: &'a PureState) -> Self {
        StateView::Pure(p)
    }
}

impl<'a> From<&'a MixedState> for StateView<'a> {
    fn from(m: &'a MixedState) -> Self {
        StateView::Mixed(m)
    }
}

/// Basis state with the given occupation tuple.
pub fn fock_state(layout: &Arc<ModeLayout>, occupations: &[usize]) -> Result<PureState, HilbertError> {
    let idx = layout.index_of(occupations)?;
    let mut v = Array1::zeros(layout.total_dim());
    v[idx] = C64::new(1.0, 0.0);
    Ok(PureState {
        layout: layout.clone(),
        amplitudes: v,
    })
}

/// Coherent state `|alpha>` on one mode, vacuum elsewhere.
///
/// The Poisson tail beyond the truncation must stay below `tail_tol`; the
/// amplitudes are renormalized on the truncated space.
pub fn coherent_state(
    layout: &Arc<ModeLayout>,
    mode: &str,
    alpha: C64,
    tail_tol: f64,
) -> Result<PureState, HilbertError> {
    let which = layout.mode_index(mode)?;
    let dim = layout.modes()[which].dim;
    let nbar = alpha.norm_sqr();

    // Poisson weights |<n|alpha>|^2 = e^{-|a|^2} |a|^{2n} / n!
    let mut tail = 1.0;
    let mut w = (-nbar).exp();
    let mut required = None;
    // scan far enough past the truncation to locate the required dim for the error message
    for n in 0..(4 * dim + 64) {
        if n == dim && tail > tail_tol {
            // keep scanning for the dim that would satisfy the tolerance
        }
        if tail <= tail_tol && required.is_none() {
            required = Some(n);
        }
        tail -= w;
        w *= nbar / (n + 1) as f64;
    }
    let mut tail_at_dim = 1.0;
    let mut w = (-nbar).exp();
    for _n in 0..dim {
        tail_at_dim -= w;
        w *= nbar / (_n + 1) as f64;
    }
    if tail_at_dim > tail_tol {
        return Err(HilbertError::CoherentTail {
            label: mode.to_string(),
            tail: tail_at_dim,
            tol: tail_tol,
            required_dim: required.unwrap_or(4 * dim + 64),
        });
    }

    let mut local = Array1::<C64>::zeros(dim);
    let mut c = C64::new((-nbar / 2.0).exp(), 0.0);
    for n in 0..dim {
        local[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    let norm = vec_norm(&local);
    local.mapv_inplace(|z| z / norm);

    // tensor with vacuum on the other modes
    let mut v = Array1::<C64>::zeros(layout.total_dim());
    let stride: usize = layout.modes()[which + 1..].iter().map(|m| m.dim).product();
    for (n, amp) in local.iter().enumerate() {
        v[n * stride] = *amp;
    }
    Ok(PureState {
        layout: layout.clone(),
        amplitudes: v,
    })
}

/// Product of Fock occupations on all modes except one coherent mode.
pub fn fock_coherent(
    layout: &Arc<ModeLayout>,
    occupations: &[(String, usize)],
    coherent_mode: &str,
    alpha: C64,
    tail_tol: f64,
) -> Result<PureState, HilbertError> {
    let coh = coherent_state(layout, coherent_mode, alpha, tail_tol)?;
    // shift the coherent product state to the requested occupations
    let mut occ = vec![0usize; layout.n_modes()];
    for (label, n) in occupations {
        occ[layout.mode_index(label)?] = *n;
    }
    let base = layout.index_of(&occ)?;
    let mut v = Array1::<C64>::zeros(layout.total_dim());
    let which = layout.mode_index(coherent_mode)?;
    let stride: usize = layout.modes()[which + 1..].iter().map(|m| m.dim).product();
    let dim = layout.modes()[which].dim;
    for n in 0..dim {
        v[base + n * stride] = coh.amplitudes[n * stride];
    }
    PureState::new(layout.clone(), v)
}

/// Reduced density matrix over the `keep` modes (declared-order preserved).
pub fn partial_trace(state: StateView<'_>, keep: &[&str]) -> Result<MixedState, HilbertError> {
    let layout = state.layout().clone();
    if keep.is_empty() {
        return Err(HilbertError::BadKeepSet);
    }
    let mut keep_idx = Vec::new();
    for label in keep {
        let i = layout.mode_index(label)?;
        if keep_idx.contains(&i) {
            return Err(HilbertError::BadKeepSet);
        }
        keep_idx.push(i);
    }
    keep_idx.sort_unstable();

    let kept_modes: Vec<_> = keep_idx.iter().map(|&i| layout.modes()[i].clone()).collect();
    let out_layout = ModeLayout::new(kept_modes)?;
    let dk = out_layout.total_dim();

    let traced_idx: Vec<usize> = (0..layout.n_modes())
        .filter(|i| !keep_idx.contains(i))
        .collect();
    let dt: usize = traced_idx.iter().map(|&i| layout.modes()[i].dim).product();

    // map (kept flat index, traced flat index) -> full flat index
    let full_index = |ki: usize, ti: usize| -> usize {
        let ko = out_layout.occupations_of(ki);
        let mut occ = vec![0usize; layout.n_modes()];
        for (slot, &mi) in keep_idx.iter().enumerate() {
            occ[mi] = ko[slot];
        }
        let mut rem = ti;
        for &mi in traced_idx.iter().rev() {
            let d = layout.modes()[mi].dim;
            occ[mi] = rem % d;
            rem /= d;
        }
        layout.index_of(&occ).expect("index arithmetic")
    };

    let mut rho = Array2::<C64>::zeros((dk, dk));
    match state {
        StateView::Pure(p) => {
            let v = p.amplitudes();
            for i in 0..dk {
                for j in 0..dk {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..dt {
                        acc += v[full_index(i, t)] * v[full_index(j, t)].conj();
                    }
                    rho[[i, j]] = acc;
                }
            }
        }
        StateView::Mixed(m) => {
            let r = m.rho();
            for i in 0..dk {
                for j in 0..dk {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..dt {
                        acc += r[[full_index(i, t), full_index(j, t)]];
                    }
                    rho[[i, j]] = acc;
                }
            }
        }
    }
    MixedState::new(out_layout, rho)
}

fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
