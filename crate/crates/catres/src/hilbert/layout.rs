//! Mode bookkeeping for truncated multimode Fock spaces.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::HilbertError;

/// Physical role of a bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeRole {
    Optical,
    Mechanical,
}

/// A single bosonic mode with a Fock-space truncation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub dim: usize,
    pub role: ModeRole,
}

/// Ordered set of modes defining a tensor-product space.
///
/// Index arithmetic is row-major over the declared order: the first mode is
/// the slowest-varying index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLayout {
    modes: Vec<Mode>,
}

impl ModeLayout {
    pub fn new(modes: Vec<Mode>) -> Result<Arc<Self>, HilbertError> {
        if modes.is_empty() {
            return Err(HilbertError::EmptyLayout);
        }
        for m in &modes {
            if m.dim < 2 {
                return Err(HilbertError::DimTooSmall {
                    label: m.label.clone(),
                    dim: m.dim,
                });
            }
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(HilbertError::DuplicateLabel(m.label.clone()));
            }
        }
        Ok(Arc::new(Self { modes }))
    }

    /// Convenience constructor from `(label, dim, role)` triples.
    pub fn from_specs(specs: &[(&str, usize, ModeRole)]) -> Result<Arc<Self>, HilbertError> {
        Self::new(
            specs
                .iter()
                .map(|&(label, dim, role)| Mode {
                    label: label.to_string(),
                    dim,
                    role,
                })
                .collect(),
        )
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim).product()
    }

    pub fn mode_index(&self, label: &str) -> Result<usize, HilbertError> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| HilbertError::UnknownMode(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize, HilbertError> {
        Ok(self.modes[self.mode_index(label)?].dim)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.modes.iter().map(|m| m.label.as_str())
    }

    /// Flat row-major index of an occupation tuple.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize, HilbertError> {
        if occupations.len() != self.modes.len() {
            return Err(HilbertError::OccupationArity {
                expected: self.modes.len(),
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for (m, &n) in self.modes.iter().zip(occupations) {
            if n >= m.dim {
                return Err(HilbertError::Truncation {
                    label: m.label.clone(),
                    occupation: n,
                    dim: m.dim,
                });
            }
            idx = idx * m.dim + n;
        }
        Ok(idx)
    }

    /// Occupation tuple of a flat index.
    pub fn occupations_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.modes.len()];
        for (k, m) in self.modes.iter().enumerate().rev() {
            out[k] = index % m.dim;
            index /= m.dim;
        }
        out
    }
}
