//! Symmetric normalized Laplacian `I - D^{-1/2} W D^{-1/2}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Sparse symmetric normalized Laplacian of a [`Graph`].
///
/// Isolated vertices get a zero row and column (their `D^{-1/2}` entry is
/// taken as 0), which keeps the spectrum inside `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedLaplacian {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl NormalizedLaplacian {
    pub fn new(g: &Graph) -> Self {
        let n = g.num_vertices();
        let inv_sqrt: Vec<f64> = g
            .degrees()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(2 * g.num_edges() + n);
        let mut vals = Vec::with_capacity(2 * g.num_edges() + n);
        offsets.push(0);
        for i in 0..n {
            let mut diag_done = g.is_isolated(i);
            for (j, w) in g.neighbors(i) {
                if !diag_done && j > i {
                    cols.push(i);
                    vals.push(1.0);
                    diag_done = true;
                }
                cols.push(j);
                vals.push(-w * inv_sqrt[i] * inv_sqrt[j]);
            }
            if !diag_done {
                cols.push(i);
                vals.push(1.0);
            }
            offsets.push(cols.len());
        }
        Self { n, offsets, cols, vals }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    /// `out = L x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        let mut out = DVector::zeros(self.n);
        self.mul_vec_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// The block of `L²` on rows and columns `idx`, formed from sparse rows
    /// without building the full square.
    pub fn squared_block(&self, idx: &[usize]) -> DMatrix<f64> {
        let m = idx.len();
        let mut pos = vec![usize::MAX; self.n];
        for (a, &i) in idx.iter().enumerate() {
            pos[i] = a;
        }
        let mut block = DMatrix::zeros(m, m);
        for (a, &i) in idx.iter().enumerate() {
            for (k, lik) in self.row(i) {
                for (j, lkj) in self.row(k) {
                    let b = pos[j];
                    if b != usize::MAX {
                        block[(a, b)] += lik * lkj;
                    }
                }
            }
        }
        block
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: len });
        }
        Ok(())
    }
}
