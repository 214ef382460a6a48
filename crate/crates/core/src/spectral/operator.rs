use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use super::{ChebyshevFilter, EigenBasis, SpectralKernel};
use crate::error::{Error, Result};
use crate::laplacian::NormalizedLaplacian;

/// A fixed linear map on graph signals.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `out = A x`; both slices have length [`LinearOperator::dim`].
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        let mut out = DVector::zeros(x.len());
        self.apply_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }
}

/// Explicit symmetric matrix operator.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        Self { matrix }
    }

    /// `U diag(h(λ)) Uᵗ`.
    pub fn spectral(basis: &EigenBasis, kernel: &SpectralKernel) -> Self {
        let u = basis.vectors();
        let mut scaled = u.clone();
        for (mut col, &l) in scaled.column_iter_mut().zip(basis.lambdas().iter()) {
            col *= kernel.eval(l);
        }
        Self::new(scaled * u.transpose())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let x = DVectorView::from_slice(x, x.len());
        let n = out.len();
        let mut out = DVectorViewMut::from_slice(out, n);
        out.gemv(1.0, &self.matrix, &x, 0.0);
    }
}

/// `p(L)` applied by the three-term Chebyshev recurrence, using only sparse
/// matrix-vector products.
#[derive(Debug, Clone, Copy)]
pub struct PolyOperator<'a> {
    lap: &'a NormalizedLaplacian,
    filter: &'a ChebyshevFilter,
}

impl<'a> PolyOperator<'a> {
    pub fn new(lap: &'a NormalizedLaplacian, filter: &'a ChebyshevFilter) -> Self {
        Self { lap, filter }
    }

    /// The dense matrix `p(L)`, built column by column with the same
    /// recurrence (no eigendecomposition).
    pub fn materialize(&self) -> DenseOperator {
        let n = self.lap.size();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            e[j] = 0.0;
            m.column_mut(j).copy_from_slice(&col);
        }
        // p(L) is symmetric; remove rounding asymmetry
        let sym = (&m + m.transpose()) * 0.5;
        DenseOperator::new(sym)
    }
}

impl LinearOperator for PolyOperator<'_> {
    fn dim(&self) -> usize {
        self.lap.size()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let c = self.filter.coeffs();
        // T_0 x = x, T_1 x = (L - I) x, T_{j+1} x = 2 (L - I) T_j x - T_{j-1} x
        let mut prev = x.to_vec();
        let mut cur = vec![0.0; n];
        let mut next = vec![0.0; n];
        for (o, &v) in out.iter_mut().zip(x) {
            *o = c[0] * v;
        }
        if c.len() == 1 {
            return;
        }
        self.lap.mul_vec_into(&prev, &mut cur);
        for i in 0..n {
            cur[i] -= prev[i];
            out[i] += c[1] * cur[i];
        }
        for &cj in &c[2..] {
            self.lap.mul_vec_into(&cur, &mut next);
            for i in 0..n {
                next[i] = 2.0 * (next[i] - cur[i]) - prev[i];
                out[i] += cj * next[i];
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
}

/// Exact spectral filtering `U h(Λ) Uᵗ f`.
pub fn apply_ideal_filter(
    basis: &EigenBasis,
    kernel: &SpectralKernel,
    f: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut coeffs = super::gft(basis, f)?;
    for (c, &l) in coeffs.iter_mut().zip(basis.lambdas().iter()) {
        *c *= kernel.eval(l);
    }
    super::igft(basis, &coeffs)
}

/// `p(L) f` for the polynomial defined by `filter`.
pub fn apply_poly_filter(
    lap: &NormalizedLaplacian,
    filter: &ChebyshevFilter,
    f: &DVector<f64>,
) -> Result<DVector<f64>> {
    PolyOperator::new(lap, filter).apply(f)
}
