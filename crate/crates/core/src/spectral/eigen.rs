use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::laplacian::NormalizedLaplacian;

/// Ascending eigenvalues and orthonormal eigenvectors (as columns) of a
/// normalized Laplacian.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    lambdas: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl EigenBasis {
    pub fn size(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &DVector<f64> {
        &self.lambdas
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Number of eigenvalues strictly inside the band `λ < ω`.
    pub fn count_below(&self, omega: f64) -> usize {
        self.lambdas.iter().take_while(|&&l| l < omega - super::BAND_EPS).count()
    }
}

/// Dense symmetric eigendecomposition. Eigenvectors are sign-normalized so
/// their first non-negligible component is positive.
pub fn eigendecompose(lap: &NormalizedLaplacian) -> Result<EigenBasis> {
    let n = lap.size();
    if n == 0 {
        return Err(Error::InvalidParameter("empty Laplacian".into()));
    }
    let eig = SymmetricEigen::try_new(lap.to_dense(), f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let lambdas = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let lead = col.iter().copied().find(|v| v.abs() > 1e-10).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * sign));
    }
    Ok(EigenBasis { lambdas, vectors })
}

/// Graph Fourier transform: coefficients `⟨f, u_i⟩`.
pub fn gft(basis: &EigenBasis, f: &DVector<f64>) -> Result<DVector<f64>> {
    check(basis, f.len())?;
    Ok(basis.vectors.tr_mul(f))
}

/// Inverse graph Fourier transform.
pub fn igft(basis: &EigenBasis, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
    check(basis, coeffs.len())?;
    Ok(&basis.vectors * coeffs)
}

fn check(basis: &EigenBasis, len: usize) -> Result<()> {
    if len != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), actual: len });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn basis_of(n: usize, edges: &[(usize, usize, f64)]) -> EigenBasis {
        eigendecompose(&NormalizedLaplacian::new(&Graph::from_edges(n, edges).unwrap())).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn single_edge_basis() {
        let b = basis_of(2, &[(0, 1, 1.0)]);
        let s = 1.0 / 2f64.sqrt();
        assert_close(b.lambdas().as_slice(), &[0.0, 2.0], 1e-12);
        assert_close(b.vectors().column(0).as_slice(), &[s, s], 1e-12);
        assert_close(b.vectors().column(1).as_slice(), &[s, -s], 1e-12);
    }

    #[test]
    fn path_basis() {
        let b = basis_of(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let r2 = 2f64.sqrt();
        assert_close(b.lambdas().as_slice(), &[0.0, 1.0, 2.0], 1e-12);
        assert_close(b.vectors().column(0).as_slice(), &[0.5, r2 / 2.0, 0.5], 1e-12);
        assert_close(b.vectors().column(1).as_slice(), &[1.0 / r2, 0.0, -1.0 / r2], 1e-12);
        assert_close(b.vectors().column(2).as_slice(), &[0.5, -r2 / 2.0, 0.5], 1e-12);
        assert_eq!(b.count_below(1.0), 1);
        assert_eq!(b.count_below(1.2), 2);
    }

    #[test]
    fn edgeless_graph_has_zero_spectrum() {
        let b = basis_of(3, &[]);
        assert_close(b.lambdas().as_slice(), &[0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn gft_of_eigenvector_is_unit() {
        let b = basis_of(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let f = DVector::from_vec(vec![0.5, 2f64.sqrt() / 2.0, 0.5]);
        let c = gft(&b, &f).unwrap();
        assert_close(c.as_slice(), &[1.0, 0.0, 0.0], 1e-12);
        let z = gft(&b, &DVector::zeros(3)).unwrap();
        assert_eq!(z, DVector::zeros(3));
        let back = igft(&b, &c).unwrap();
        assert_close(back.as_slice(), f.as_slice(), 1e-12);
        assert!(gft(&b, &DVector::zeros(2)).is_err());
    }
}
