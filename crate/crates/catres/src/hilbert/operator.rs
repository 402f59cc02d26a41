//! Dense operators on a mode layout.

use ndarray::{Array1, Array2};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use super::{C64, HilbertError, ModeLayout, PureState};

/// A dense complex matrix tied to a [`ModeLayout`].
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    layout: Arc<ModeLayout>,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn new(layout: Arc<ModeLayout>, entries: Array2<C64>) -> Result<Self, HilbertError> {
        let d = layout.total_dim();
        if entries.shape() != [d, d] {
            return Err(HilbertError::LayoutMismatch);
        }
        Ok(Self { layout, entries })
    }

    pub fn zeros(layout: Arc<ModeLayout>) -> Self {
        let d = layout.total_dim();
        Self {
            layout,
            entries: Array2::zeros((d, d)),
        }
    }

    pub fn layout(&self) -> &Arc<ModeLayout> {
        &self.layout
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: self.entries.mapv(|z| z * factor),
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            entries: self.entries.dot(&other.entries),
        })
    }

    pub fn add_op(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub_op(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            entries: &self.entries - &other.entries,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        Ok(self.compose(other)?.sub_op(&other.compose(self)?)?)
    }

    pub fn apply(&self, vec: &Array1<C64>) -> Array1<C64> {
        self.entries.dot(vec)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                if (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Expectation value on a pure state.
    pub fn expectation(&self, psi: &PureState) -> Result<C64, HilbertError> {
        if !Arc::ptr_eq(&self.layout, psi.layout()) && *self.layout != **psi.layout() {
            return Err(HilbertError::LayoutMismatch);
        }
        let v = psi.amplitudes();
        let av = self.entries.dot(v);
        Ok(v.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_layout(&self, other: &Self) -> Result<(), HilbertError> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(HilbertError::LayoutMismatch)
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.add_op(rhs).expect("layout mismatch in operator add")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.sub_op(rhs).expect("layout mismatch in operator sub")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.compose(rhs).expect("layout mismatch in operator mul")
    }
}

/// Lowering operator on one mode, identity elsewhere: `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(layout: &Arc<ModeLayout>, mode: &str) -> Result<OperatorMatrix, HilbertError> {
    let which = layout.mode_index(mode)?;
    let dims: Vec<usize> = layout.modes().iter().map(|m| m.dim).collect();
    // stride of the target mode in the row-major flattening
    let stride: usize = dims[which + 1..].iter().product();
    let d = layout.total_dim();
    let mode_dim = dims[which];
    let mut m = Array2::<C64>::zeros((d, d));
    for col in 0..d {
        let n = (col / stride) % mode_dim;
        if n > 0 {
            m[[col - stride, col]] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    Ok(OperatorMatrix {
        layout: layout.clone(),
        entries: m,
    })
}

pub fn creation(layout: &Arc<ModeLayout>, mode: &str) -> Result<OperatorMatrix, HilbertError> {
    Ok(annihilation(layout, mode)?.dagger())
}

/// Number operator `a^dag a` on one mode.
pub fn number(layout: &Arc<ModeLayout>, mode: &str) -> Result<OperatorMatrix, HilbertError> {
    let a = annihilation(layout, mode)?;
    a.dagger().compose(&a)
}

pub fn identity(layout: &Arc<ModeLayout>) -> OperatorMatrix {
    OperatorMatrix {
        layout: layout.clone(),
        entries: Array2::eye(layout.total_dim()),
    }
}
