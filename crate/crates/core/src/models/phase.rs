use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};

/// A point `x = (p, q)` of `ℝ²ⁿ` in canonical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl PhasePoint {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Dimension { expected: p.len(), found: q.len() });
        }
        if p.is_empty() {
            return Err(Error::InvalidArgument("phase space dimension must be at least 1".into()));
        }
        if p.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::Domain("phase point has non-finite entries".into()));
        }
        Ok(PhasePoint { p, q })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// Stacked `(p, q)` vector.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.dim(), self.p.iter().chain(&self.q).copied())
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("phase vector must have even length".into()));
        }
        let n = x.len() / 2;
        PhasePoint::new(x[..n].to_vec(), x[n..].to_vec())
    }

    pub fn from_vector(x: &DVector<f64>) -> Result<Self> {
        PhasePoint::from_slice(x.as_slice())
    }
}
