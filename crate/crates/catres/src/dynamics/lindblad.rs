//! Lindblad master-equation propagation, with an optional projection onto a
//! bounded total-photon-number sector (loss only moves population downward,
//! so the projected dynamics are exact for initial states inside the sector).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::sync::Arc;

use super::ode::integrate;
use super::{CollapseChannel, DynamicsError, TimeGrid, Trajectory, TrajectoryState, TRACE_ABORT};
use crate::hilbert::{MixedState, ModeLayout, OperatorMatrix};

const MINUS_I: C64 = C64::new(0.0, -1.0);

struct ChannelMats {
    l: Array2<C64>,
    l_dag: Array2<C64>,
    ldl: Array2<C64>,
    rate: f64, // angular
}

fn channel_mats(ms: &[(Array2<C64>, f64)]) -> Vec<ChannelMats> {
    ms.iter()
        .map(|(l, rate)| {
            let l_dag = l.t().mapv(|z| z.conj());
            let ldl = l_dag.dot(l);
            ChannelMats {
                l: l.clone(),
                l_dag,
                ldl,
                rate: *rate,
            }
        })
        .collect()
}

fn lindblad_rhs(h: &Array2<C64>, chans: &[ChannelMats], rho: &Array2<C64>) -> Array2<C64> {
    let mut d = h.dot(rho);
    d.scaled_add(C64::new(-1.0, 0.0), &rho.dot(h));
    d.mapv_inplace(|z| MINUS_I * z);
    for ch in chans {
        let r = C64::new(ch.rate, 0.0);
        let half = C64::new(-0.5 * ch.rate, 0.0);
        let lr = ch.l.dot(rho);
        d.scaled_add(r, &lr.dot(&ch.l_dag));
        d.scaled_add(half, &ch.ldl.dot(rho));
        d.scaled_add(half, &rho.dot(&ch.ldl));
    }
    d
}

/// Raw-array core: propagates `rho' = -i[H, rho] + sum rate D[L] rho`
/// through `times`, calling `on_sample` with the raw density matrix.
/// H and rates in angular units.
fn lindblad_core(
    h: &Array2<C64>,
    channels: &[(Array2<C64>, f64)],
    rho0: &Array2<C64>,
    times: &[f64],
    rel_tol: f64,
    mut on_sample: impl FnMut(usize, f64, &Array2<C64>),
) -> Result<(), DynamicsError> {
    let chans = channel_mats(channels);
    let mut bad: Option<(f64, f64)> = None;
    integrate(
        |_t, rho: &Array2<C64>| lindblad_rhs(h, &chans, rho),
        rho0,
        times,
        rel_tol,
        None,
        |si, t, rho| {
            let tr: C64 = (0..rho.nrows()).map(|i| rho[[i, i]]).sum();
            let drift = (tr.re - 1.0).abs().max(tr.im.abs());
            if drift > TRACE_ABORT && bad.is_none() {
                bad = Some((t, drift));
            }
            on_sample(si, t, rho);
        },
    )?;
    if let Some((t, drift)) = bad {
        return Err(DynamicsError::TraceDrift { t, drift });
    }
    Ok(())
}

/// Lindblad propagation on the full layout.
pub fn evolve_lindblad(
    h: &OperatorMatrix,
    channels: &[CollapseChannel],
    rho0: &MixedState,
    grid: &TimeGrid,
) -> Result<Trajectory, DynamicsError> {
    let tol = 1e-10 * h.max_abs().max(1.0);
    if !h.is_hermitian(tol) {
        return Err(DynamicsError::NonHermitian {
            defect: f64::NAN,
            tol,
        });
    }
    for ch in channels {
        if ch.rate_hz < 0.0 {
            return Err(DynamicsError::NegativeRate(ch.rate_hz));
        }
    }
    let raw: Vec<(Array2<C64>, f64)> = channels
        .iter()
        .map(|c| (c.operator.entries().clone(), c.rate_angular()))
        .collect();
    let times = grid.times();
    let layout = rho0.layout().clone();
    let mut traj = Trajectory::new(times.clone());
    lindblad_core(
        h.entries(),
        &raw,
        rho0.rho(),
        &times,
        grid.rel_tol,
        |_, _, rho| {
            let tr: C64 = (0..rho.nrows()).map(|i| rho[[i, i]]).sum();
            let drift = (tr.re - 1.0).abs().max(tr.im.abs());
            let state = MixedState::new(layout.clone(), rho.clone())
                .expect("dimension fixed by the integrator");
            traj.push(TrajectoryState::Mixed(state), drift);
        },
    )?;
    Ok(traj)
}

/// Selection of full-layout basis indices whose summed occupation over a set
/// of modes does not exceed a cap.
#[derive(Debug, Clone)]
pub struct SectorProjection {
    layout: Arc<ModeLayout>,
    indices: Vec<usize>,
}

impl SectorProjection {
    /// Keeps basis states with `sum of occupations over `modes` <= max_total`.
    pub fn total_occupation_at_most(
        layout: &Arc<ModeLayout>,
        modes: &[&str],
        max_total: usize,
    ) -> Result<Self, DynamicsError> {
        let mut which = Vec::new();
        for m in modes {
            which.push(layout.mode_index(m)?);
        }
        let indices: Vec<usize> = (0..layout.total_dim())
            .filter(|&i| {
                let occ = layout.occupations_of(i);
                which.iter().map(|&k| occ[k]).sum::<usize>() <= max_total
            })
            .collect();
        if indices.is_empty() {
            return Err(DynamicsError::EmptySector);
        }
        Ok(Self {
            layout: layout.clone(),
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn layout(&self) -> &Arc<ModeLayout> {
        &self.layout
    }

    pub fn project_matrix(&self, m: &Array2<C64>) -> Array2<C64> {
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        for (i, &fi) in self.indices.iter().enumerate() {
            for (j, &fj) in self.indices.iter().enumerate() {
                out[[i, j]] = m[[fi, fj]];
            }
        }
        out
    }

    pub fn project_vector(&self, v: &Array1<C64>) -> Array1<C64> {
        Array1::from_iter(self.indices.iter().map(|&fi| v[fi]))
    }

    pub fn embed_matrix(&self, m: &Array2<C64>) -> Array2<C64> {
        let d = self.layout.total_dim();
        let mut out = Array2::zeros((d, d));
        for (i, &fi) in self.indices.iter().enumerate() {
            for (j, &fj) in self.indices.iter().enumerate() {
                out[[fi, fj]] = m[[i, j]];
            }
        }
        out
    }

    /// Weight the projection discards from a density matrix (diagonal mass
    /// outside the sector).
    pub fn discarded_weight(&self, rho: &Array2<C64>) -> f64 {
        let kept: f64 = self.indices.iter().map(|&i| rho[[i, i]].re).sum();
        1.0 - kept
    }
}

/// Lindblad propagation projected onto the total-photon-number sector
/// spanned by the initial state (exact when every channel only lowers, or
/// acts trivially on, the selected occupation sum).
pub fn evolve_lindblad_in_sector(
    h: &OperatorMatrix,
    channels: &[CollapseChannel],
    rho0: &MixedState,
    grid: &TimeGrid,
    proj: &SectorProjection,
) -> Result<Trajectory, DynamicsError> {
    let tol = 1e-10 * h.max_abs().max(1.0);
    if !h.is_hermitian(tol) {
        return Err(DynamicsError::NonHermitian {
            defect: f64::NAN,
            tol,
        });
    }
    let discarded = proj.discarded_weight(rho0.rho());
    if discarded.abs() > 1e-12 {
        return Err(DynamicsError::EmptySector);
    }
    let hp = proj.project_matrix(h.entries());
    let raw: Vec<(Array2<C64>, f64)> = channels
        .iter()
        .map(|c| (proj.project_matrix(c.operator.entries()), c.rate_angular()))
        .collect();
    let times = grid.times();
    let layout = rho0.layout().clone();
    let mut traj = Trajectory::new(times.clone());
    lindblad_core(
        &hp,
        &raw,
        &proj.project_matrix(rho0.rho()),
        &times,
        grid.rel_tol,
        |_, _, rho| {
            let tr: C64 = (0..rho.nrows()).map(|i| rho[[i, i]]).sum();
            let drift = (tr.re - 1.0).abs().max(tr.im.abs());
            let state = MixedState::new(layout.clone(), proj.embed_matrix(rho))
                .expect("dimension fixed by the projection");
            traj.push(TrajectoryState::Mixed(state), drift);
        },
    )?;
    Ok(traj)
}

/// Block-diagonal density matrix over a conserved-charge decomposition; the
/// integrator only ever touches the stored blocks.
#[derive(Clone)]
struct BlockDiag(Vec<Array2<C64>>);

impl super::ode::OdeState for BlockDiag {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (b, xb) in self.0.iter_mut().zip(&x.0) {
            b.scaled_add(C64::new(a, 0.0), xb);
        }
    }
    fn zeros_like(&self) -> Self {
        BlockDiag(self.0.iter().map(|b| Array2::zeros(b.raw_dim())).collect())
    }
    fn inf_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|b| b.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr())).sqrt())
            .fold(0.0f64, f64::max)
    }
}

fn sub_block(m: &Array2<C64>, rows: &[usize], cols: &[usize]) -> Array2<C64> {
    let mut out = Array2::zeros((rows.len(), cols.len()));
    for (i, &fi) in rows.iter().enumerate() {
        for (j, &fj) in cols.iter().enumerate() {
            out[[i, j]] = m[[fi, fj]];
        }
    }
    out
}

/// How a collapse operator moves the conserved charge.
#[derive(Clone, Copy, PartialEq)]
enum ChargeShift {
    Conserving,
    Lowering,
}

/// Dynamics for each propagated charge block: the non-Hermitian effective
/// Hamiltonian plus the jump terms that recycle population within the block
/// (conserving channels) or feed it from the block one charge above
/// (lowering channels).
struct BlockDynamics {
    heff: Array2<C64>,
    recycle: Vec<(Array2<C64>, Array2<C64>, f64)>, // (L_qq, L_qq^dag, rate)
    feed: Vec<(Array2<C64>, Array2<C64>, f64)>,    // (L_{q,q+1}, dag, rate)
}

/// Lindblad propagation exploiting a conserved charge (the summed occupation
/// over `modes`): the Hamiltonian must commute with the charge and every
/// collapse operator must either conserve it or lower it by exactly one, so
/// the density matrix stays block diagonal and only charges at or below the
/// initial support are ever populated. Each sample is embedded back into the
/// full layout.
pub fn evolve_lindblad_charge_blocks(
    h: &OperatorMatrix,
    channels: &[CollapseChannel],
    rho0: &MixedState,
    grid: &TimeGrid,
    modes: &[&str],
    max_charge: usize,
) -> Result<Trajectory, DynamicsError> {
    let tol = 1e-10 * h.max_abs().max(1.0);
    if !h.is_hermitian(tol) {
        return Err(DynamicsError::NonHermitian {
            defect: f64::NAN,
            tol,
        });
    }
    for ch in channels {
        if ch.rate_hz < 0.0 {
            return Err(DynamicsError::NegativeRate(ch.rate_hz));
        }
    }
    let layout = rho0.layout().clone();
    let dim = layout.total_dim();
    let mut which = Vec::new();
    for m in modes {
        which.push(layout.mode_index(m)?);
    }
    let charge_of = |i: usize| -> usize {
        let occ = layout.occupations_of(i);
        which.iter().map(|&k| occ[k]).sum()
    };
    let mut indices_by_q: Vec<Vec<usize>> = vec![Vec::new(); max_charge + 1];
    for i in 0..dim {
        let q = charge_of(i);
        if q <= max_charge {
            indices_by_q[q].push(i);
        }
    }

    // structural checks: H block diagonal, rho0 block diagonal with no
    // support above the cap
    let he = h.entries();
    let h_tol = 1e-9 * h.max_abs().max(1.0);
    for i in 0..dim {
        for j in 0..dim {
            if he[[i, j]].norm() > h_tol && charge_of(i) != charge_of(j) {
                return Err(DynamicsError::ChargeStructure(format!(
                    "Hamiltonian couples charge {} to charge {}",
                    charge_of(j),
                    charge_of(i)
                )));
            }
        }
    }
    let r0 = rho0.rho();
    let mut outside = 0.0f64;
    for i in 0..dim {
        let qi = charge_of(i);
        if qi > max_charge {
            outside += r0[[i, i]].re.abs();
        }
        for j in 0..dim {
            if qi != charge_of(j) && r0[[i, j]].norm() > 1e-12 {
                return Err(DynamicsError::ChargeStructure(format!(
                    "initial state has coherence between charges {} and {}",
                    qi,
                    charge_of(j)
                )));
            }
        }
    }
    if outside > 1e-12 {
        return Err(DynamicsError::EmptySector);
    }

    // classify channels by the single charge shift they induce
    let mut shifts: Vec<ChargeShift> = Vec::with_capacity(channels.len());
    for ch in channels {
        let le = ch.operator.entries();
        let l_tol = 1e-12 * ch.operator.max_abs().max(1.0);
        let mut dq: Option<i64> = None;
        for i in 0..dim {
            for j in 0..dim {
                if le[[i, j]].norm() <= l_tol || charge_of(j) > max_charge {
                    continue;
                }
                let d = charge_of(i) as i64 - charge_of(j) as i64;
                match dq {
                    None => dq = Some(d),
                    Some(prev) if prev != d => {
                        return Err(DynamicsError::ChargeStructure(
                            "collapse operator mixes charge shifts".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        shifts.push(match dq {
            None | Some(0) => ChargeShift::Conserving,
            Some(-1) => ChargeShift::Lowering,
            Some(d) => {
                return Err(DynamicsError::ChargeStructure(format!(
                    "collapse operator shifts the charge by {d}"
                )))
            }
        });
    }

    // active blocks: the initial support, extended downward when any channel
    // lowers the charge
    let occupied: Vec<usize> = (0..=max_charge)
        .filter(|&q| {
            indices_by_q[q]
                .iter()
                .map(|&i| r0[[i, i]].re)
                .sum::<f64>()
                > 1e-14
        })
        .collect();
    if occupied.is_empty() {
        return Err(DynamicsError::EmptySector);
    }
    let has_lowering = shifts.iter().any(|&s| s == ChargeShift::Lowering);
    let q_top = *occupied.last().expect("nonempty");
    let active: Vec<usize> = if has_lowering {
        (0..=q_top).collect()
    } else {
        occupied
    };

    // per-block effective Hamiltonian and jump blocks
    let mut dynamics: Vec<BlockDynamics> = Vec::with_capacity(active.len());
    for (k, &q) in active.iter().enumerate() {
        let idx = &indices_by_q[q];
        let mut heff = sub_block(he, idx, idx);
        let mut recycle = Vec::new();
        let mut feed = Vec::new();
        for (ch, &shift) in channels.iter().zip(&shifts) {
            let rate = ch.rate_angular();
            if rate == 0.0 {
                continue;
            }
            let le = ch.operator.entries();
            match shift {
                ChargeShift::Conserving => {
                    let lqq = sub_block(le, idx, idx);
                    let ldag = lqq.t().mapv(|z| z.conj());
                    heff.scaled_add(C64::new(0.0, -0.5 * rate), &ldag.dot(&lqq));
                    recycle.push((lqq, ldag, rate));
                }
                ChargeShift::Lowering => {
                    // decay out of this block (L_{q-1,q})
                    if q > 0 {
                        let down = sub_block(le, &indices_by_q[q - 1], idx);
                        let ddag = down.t().mapv(|z| z.conj());
                        heff.scaled_add(C64::new(0.0, -0.5 * rate), &ddag.dot(&down));
                    }
                    // population fed from the block one charge above
                    if k + 1 < active.len() && active[k + 1] == q + 1 {
                        let lf = sub_block(le, idx, &indices_by_q[q + 1]);
                        let lf_dag = lf.t().mapv(|z| z.conj());
                        feed.push((lf, lf_dag, rate));
                    }
                }
            }
        }
        dynamics.push(BlockDynamics { heff, recycle, feed });
    }

    let y0 = BlockDiag(
        active
            .iter()
            .map(|&q| sub_block(r0, &indices_by_q[q], &indices_by_q[q]))
            .collect(),
    );

    // rho stays Hermitian block by block, so -i(Heff rho - rho Heff^dag)
    // equals -i(M - M^dag) with M = Heff rho: one gemm instead of two.
    let rhs = |_t: f64, y: &BlockDiag| -> BlockDiag {
        let mut out = Vec::with_capacity(y.0.len());
        for (k, dynk) in dynamics.iter().enumerate() {
            let rho = &y.0[k];
            let m = dynk.heff.dot(rho);
            let mut d = m.t().mapv(|z| z.conj());
            d.zip_mut_with(&m, |dst, &src| *dst = MINUS_I * (src - *dst));
            for (l, ldag, rate) in &dynk.recycle {
                d.scaled_add(C64::new(*rate, 0.0), &l.dot(rho).dot(ldag));
            }
            for (lf, lf_dag, rate) in &dynk.feed {
                let upper = &y.0[k + 1];
                d.scaled_add(C64::new(*rate, 0.0), &lf.dot(upper).dot(lf_dag));
            }
            out.push(d);
        }
        BlockDiag(out)
    };

    let times = grid.times();
    let mut traj = Trajectory::new(times.clone());
    let mut bad: Option<(f64, f64)> = None;
    integrate(
        rhs,
        &y0,
        &times,
        grid.rel_tol,
        None,
        |_si, t, y: &BlockDiag| {
            let tr: C64 = y
                .0
                .iter()
                .map(|b| (0..b.nrows()).map(|i| b[[i, i]]).sum::<C64>())
                .sum();
            let drift = (tr.re - 1.0).abs().max(tr.im.abs());
            if drift > TRACE_ABORT && bad.is_none() {
                bad = Some((t, drift));
            }
            let mut full = Array2::zeros((dim, dim));
            for (k, &q) in active.iter().enumerate() {
                let idx = &indices_by_q[q];
                let b = &y.0[k];
                for (i, &fi) in idx.iter().enumerate() {
                    for (j, &fj) in idx.iter().enumerate() {
                        full[[fi, fj]] = b[[i, j]];
                    }
                }
            }
            let state = MixedState::new(layout.clone(), full)
                .expect("dimension fixed by the layout");
            traj.push(TrajectoryState::Mixed(state), drift);
        },
    )?;
    if let Some((t, drift)) = bad {
        return Err(DynamicsError::TraceDrift { t, drift });
    }
    Ok(traj)
}
