//! Graph signals and sampling sets.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Real vector indexed by graph vertices.
pub type GraphSignal = DVector<f64>;

/// Split of the vertex set into known samples `S` (with their values) and
/// the unknown complement.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    known: Vec<usize>,
    values: Vec<f64>,
    unknown: Vec<usize>,
    is_known: Vec<bool>,
}

impl SampleSet {
    /// `known[i]` carries `values[i]`. The unknown list is the complement in
    /// ascending order.
    pub fn new(n: usize, known: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if known.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: known.len(), actual: values.len() });
        }
        if known.is_empty() {
            return Err(Error::EmptyKnownSet);
        }
        let mut is_known = vec![false; n];
        for &v in &known {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, len: n });
            }
            if std::mem::replace(&mut is_known[v], true) {
                return Err(Error::InvalidParameter(format!("vertex {v} sampled twice")));
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample value {bad}")));
        }
        let unknown = (0..n).filter(|&v| !is_known[v]).collect();
        Ok(Self { n, known, values, unknown, is_known })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn known(&self) -> &[usize] {
        &self.known
    }

    pub fn known_values(&self) -> &[f64] {
        &self.values
    }

    pub fn unknown(&self) -> &[usize] {
        &self.unknown
    }

    pub fn is_known(&self, v: usize) -> bool {
        self.is_known[v]
    }

    /// Downsample-then-upsample signal: known values on `S`, zero elsewhere.
    pub fn du_signal(&self) -> GraphSignal {
        let mut f = DVector::zeros(self.n);
        for (&v, &x) in self.known.iter().zip(&self.values) {
            f[v] = x;
        }
        f
    }

    /// Overwrites the entries of `x` on `S` with the known values.
    pub fn reset_known(&self, x: &mut [f64]) {
        for (&v, &val) in self.known.iter().zip(&self.values) {
            x[v] = val;
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: len });
        }
        Ok(())
    }
}
