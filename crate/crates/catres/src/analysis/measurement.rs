//! Conditional photon-number measurement of optical modes.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::AnalysisError;
use crate::hilbert::{MixedState, ModeLayout, StateView};

pub const DEFAULT_PROB_FLOOR: f64 = 1e-10;

/// A joint photon-number record with its Born probability and the normalized
/// conditional state of the unmeasured modes.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// Occupation per measured mode, in the order they were requested.
    pub record: Vec<usize>,
    pub probability: f64,
    pub conditional_state: MixedState,
}

/// Projects the named modes onto every photon-number record with probability
/// above `prob_floor`; outcomes sorted by descending probability (record
/// lexicographic as tiebreak).
pub fn photon_number_measurement(
    state: StateView<'_>,
    modes: &[&str],
    prob_floor: f64,
) -> Result<Vec<MeasurementOutcome>, AnalysisError> {
    let layout = state.layout().clone();
    let mut meas_idx = Vec::new();
    for m in modes {
        meas_idx.push(layout.mode_index(m)?);
    }

    let rem_modes: Vec<_> = (0..layout.n_modes())
        .filter(|i| !meas_idx.contains(i))
        .map(|i| layout.modes()[i].clone())
        .collect();
    let rem_layout = ModeLayout::new(rem_modes)?;
    let rem_idx: Vec<usize> = (0..layout.n_modes())
        .filter(|i| !meas_idx.contains(i))
        .collect();
    let dr = rem_layout.total_dim();

    // map full index -> (record flat key, remaining flat index)
    let n_records: usize = meas_idx.iter().map(|&i| layout.modes()[i].dim).product();
    let decompose = |full: usize| -> (usize, usize) {
        let occ = layout.occupations_of(full);
        let mut rk = 0usize;
        for &mi in &meas_idx {
            rk = rk * layout.modes()[mi].dim + occ[mi];
        }
        let mut ri = 0usize;
        for &mi in &rem_idx {
            ri = ri * layout.modes()[mi].dim + occ[mi];
        }
        (rk, ri)
    };

    // accumulate per-record conditional (unnormalized) density blocks
    let mut blocks: Vec<Option<Array2<C64>>> = vec![None; n_records];
    match state {
        StateView::Pure(psi) => {
            let mut vecs: Vec<Option<ndarray::Array1<C64>>> = vec![None; n_records];
            for (full, amp) in psi.amplitudes().iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let (rk, ri) = decompose(full);
                vecs[rk].get_or_insert_with(|| ndarray::Array1::zeros(dr))[ri] += *amp;
            }
            for (rk, v) in vecs.into_iter().enumerate() {
                if let Some(v) = v {
                    let mut rho = Array2::zeros((dr, dr));
                    for i in 0..dr {
                        for j in 0..dr {
                            rho[[i, j]] = v[i] * v[j].conj();
                        }
                    }
                    blocks[rk] = Some(rho);
                }
            }
        }
        StateView::Mixed(mx) => {
            let rho = mx.rho();
            let d = layout.total_dim();
            let mut keys = Vec::with_capacity(d);
            for full in 0..d {
                keys.push(decompose(full));
            }
            for a in 0..d {
                let (rka, ria) = keys[a];
                for b in 0..d {
                    let (rkb, rib) = keys[b];
                    if rka != rkb {
                        continue; // projective measurement kills off-record coherences
                    }
                    let z = rho[[a, b]];
                    if z.norm_sqr() == 0.0 {
                        continue;
                    }
                    blocks[rka].get_or_insert_with(|| Array2::zeros((dr, dr)))[[ria, rib]] += z;
                }
            }
        }
    }

    let record_of = |mut rk: usize| -> Vec<usize> {
        let mut rec = vec![0usize; meas_idx.len()];
        for (slot, &mi) in meas_idx.iter().enumerate().rev() {
            let dm = layout.modes()[mi].dim;
            rec[slot] = rk % dm;
            rk /= dm;
        }
        rec
    };

    let mut outcomes = Vec::new();
    for (rk, blk) in blocks.into_iter().enumerate() {
        let Some(blk) = blk else { continue };
        let p: f64 = (0..dr).map(|i| blk[[i, i]].re).sum();
        if p <= prob_floor {
            continue;
        }
        let cond = blk.mapv(|z| z / p);
        outcomes.push(MeasurementOutcome {
            record: record_of(rk),
            probability: p,
            conditional_state: MixedState::new(rem_layout.clone(), cond)?,
        });
    }
    outcomes.sort_by(|a, b| {
        b.probability
            .partial_cmp(&a.probability)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.record.cmp(&b.record))
    });
    Ok(outcomes)
}
