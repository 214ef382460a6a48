//! Band-limited reconstruction: cutoff estimation from the sampling set,
//! exact least-squares projection onto the band, and the iterative
//! projection scheme that alternates sample resets with low-pass filtering.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::iterate::{FilterMode, IterResult, IterStatus, StoppingRule};
use crate::laplacian::NormalizedLaplacian;
use crate::signal::{GraphSignal, SampleSet};
use crate::spectral::{
    chebyshev_coeffs, eigendecompose, DenseOperator, EigenBasis, LinearOperator, PolyOperator,
    SpectralKernel,
};

/// Half-width of the raised-cosine transition placed around the cutoff
/// before the low-pass kernel is expanded in Chebyshev polynomials.
pub const POLY_TRANSITION_HALF_WIDTH: f64 = 0.1;

/// Relative rank threshold on the pivoted QR diagonal of the sampled basis.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEstimate {
    /// Largest frequency for which recovery from the sampling set is unique.
    pub omega: f64,
    /// Smallest eigenvalue of the unknown-set block of `L²`.
    pub sigma_min_sq: f64,
    /// Number of Laplacian eigenvalues strictly below `omega`.
    pub k: usize,
}

/// Smallest eigenvalue of `(L²)` restricted to the unknown vertices.
pub fn sigma_min_sq(lap: &NormalizedLaplacian, samples: &SampleSet) -> Result<f64> {
    samples.check_len(lap.size())?;
    if samples.unknown().is_empty() {
        return Err(Error::EmptyUnknownSet);
    }
    let block = lap.squared_block(samples.unknown());
    let min = SymmetricEigen::try_new(block, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?
        .eigenvalues
        .min();
    if min < -1e-8 {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(min)
}

/// Cutoff frequency `ω = σ_min` for the sampling set, with the band size
/// taken from a precomputed eigenbasis.
pub fn cutoff_frequency_with(
    lap: &NormalizedLaplacian,
    samples: &SampleSet,
    basis: &EigenBasis,
) -> Result<CutoffEstimate> {
    let sigma_min_sq = sigma_min_sq(lap, samples)?;
    let omega = sigma_min_sq.max(0.0).sqrt();
    Ok(CutoffEstimate { omega, sigma_min_sq, k: basis.count_below(omega) })
}

/// Cutoff frequency `ω = σ_min` for the sampling set.
pub fn cutoff_frequency(lap: &NormalizedLaplacian, samples: &SampleSet) -> Result<CutoffEstimate> {
    let sigma_min_sq = sigma_min_sq(lap, samples)?;
    let omega = sigma_min_sq.max(0.0).sqrt();
    let lambdas = lap.to_dense().symmetric_eigenvalues();
    let k = lambdas.iter().filter(|&&l| l < omega - crate::spectral::BAND_EPS).count();
    Ok(CutoffEstimate { omega, sigma_min_sq, k })
}

/// Least-squares reconstruction in the span of the eigenvectors with
/// `λ < ω`. Known samples are returned unchanged.
pub fn lsr(basis: &EigenBasis, samples: &SampleSet, omega: f64) -> Result<GraphSignal> {
    samples.check_len(basis.size())?;
    let k = basis.count_below(omega);
    if k == 0 {
        return Err(Error::NoBasisVectors(omega));
    }
    let known = samples.known();
    if known.len() < k {
        return Err(Error::RankDeficient { rank: known.len(), k });
    }
    let u = basis.vectors();
    let sampled = DMatrix::from_fn(known.len(), k, |r, c| u[(known[r], c)]);
    let rhs = DVector::from_column_slice(samples.known_values());
    let coeffs = least_squares(sampled, &rhs)?;
    let mut out = u.columns(0, k) * coeffs;
    samples.reset_known(out.as_mut_slice());
    Ok(out)
}

/// Full-column-rank least squares by column-pivoted Householder QR. The
/// rank is the number of `|R_ii|` above `RANK_TOL · |R_00|`.
fn least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let k = a.ncols();
    let qr = a.col_piv_qr();
    let r = qr.r();
    let lead = r[(0, 0)].abs();
    let rank = (0..k).filter(|&i| r[(i, i)].abs() > RANK_TOL * lead).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, k });
    }
    let qtb = qr.q().tr_mul(b);
    let mut z = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficient { rank, k })?;
    qr.p().inv_permute_rows(&mut z);
    Ok(z)
}

/// Iterative band-limited reconstruction
/// `f_0 = P f_du`, `f_{k+1} = P (f_k + Jᵗ J (f_du - f_k))`.
///
/// In polynomial mode `P` is a Chebyshev approximation of a smoothed
/// low-pass kernel and no eigendecomposition is performed.
pub fn ilsr(
    lap: &NormalizedLaplacian,
    samples: &SampleSet,
    omega: f64,
    mode: FilterMode,
    stop: &StoppingRule,
) -> Result<IterResult> {
    samples.check_len(lap.size())?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("cutoff must be positive, got {omega}")));
    }
    match mode {
        FilterMode::Ideal => {
            let basis = eigendecompose(lap)?;
            let op = DenseOperator::spectral(&basis, &SpectralKernel::IdealLowpass { omega });
            ilsr_with(&op, samples, stop, |_| {})
        }
        FilterMode::Polynomial(degree) => {
            let filter = chebyshev_coeffs(&smooth_lowpass(omega), degree)?;
            ilsr_with(&PolyOperator::new(lap, &filter), samples, stop, |_| {})
        }
    }
}

/// Kernel expanded for the polynomial low-pass path.
pub fn smooth_lowpass(omega: f64) -> SpectralKernel {
    SpectralKernel::SmoothLowpass { omega, half_width: POLY_TRANSITION_HALF_WIDTH }
}

/// The projection iteration with an arbitrary low-pass operator.
/// `on_iterate` sees `f_0, f_1, ...` before the final sample reset.
pub fn ilsr_with(
    lowpass: &impl LinearOperator,
    samples: &SampleSet,
    stop: &StoppingRule,
    mut on_iterate: impl FnMut(&GraphSignal),
) -> Result<IterResult> {
    samples.check_len(lowpass.dim())?;
    let n = samples.num_vertices();
    let du = samples.du_signal();
    let mut current = DVector::zeros(n);
    lowpass.apply_into(du.as_slice(), current.as_mut_slice());
    on_iterate(&current);

    let mut reset = DVector::zeros(n);
    let mut next = DVector::zeros(n);
    let mut status = IterStatus::NotConverged;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while iterations < stop.max_iters {
        reset.copy_from(&current);
        samples.reset_known(reset.as_mut_slice());
        lowpass.apply_into(reset.as_slice(), next.as_mut_slice());
        iterations += 1;

        let change = (&next - &current).norm();
        let norm = current.norm();
        last_change = if norm > 0.0 { change / norm } else { change };
        std::mem::swap(&mut current, &mut next);
        on_iterate(&current);
        if stop.reached(change, norm) {
            status = IterStatus::Converged;
            break;
        }
    }
    samples.reset_known(current.as_mut_slice());
    Ok(IterResult { signal: current, iterations, status, last_change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn lap(n: usize, edges: &[(usize, usize, f64)]) -> NormalizedLaplacian {
        NormalizedLaplacian::new(&Graph::from_edges(n, edges).unwrap())
    }

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn cutoff_single_edge() {
        let l = lap(2, &[(0, 1, 1.0)]);
        let s = SampleSet::new(2, vec![0], vec![1.0]).unwrap();
        let c = cutoff_frequency(&l, &s).unwrap();
        assert!((c.sigma_min_sq - 2.0).abs() < 1e-12);
        assert!((c.omega - SQRT2).abs() < 1e-12);
        assert_eq!(c.k, 1);
    }

    #[test]
    fn cutoff_path() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = SampleSet::new(3, vec![0, 2], vec![1.0, 1.0]).unwrap();
        let c = cutoff_frequency(&l, &s).unwrap();
        assert!((c.omega - SQRT2).abs() < 1e-12);
        assert_eq!(c.k, 2);
        let basis = eigendecompose(&l).unwrap();
        assert_eq!(cutoff_frequency_with(&l, &s, &basis).unwrap(), c);
    }

    #[test]
    fn cutoff_needs_unknowns() {
        let l = lap(2, &[(0, 1, 1.0)]);
        let s = SampleSet::new(2, vec![0, 1], vec![1.0, 2.0]).unwrap();
        assert!(matches!(cutoff_frequency(&l, &s), Err(Error::EmptyUnknownSet)));
    }

    #[test]
    fn lsr_single_edge_copies_value() {
        let l = lap(2, &[(0, 1, 1.0)]);
        let basis = eigendecompose(&l).unwrap();
        let s = SampleSet::new(2, vec![0], vec![3.5]).unwrap();
        let f = lsr(&basis, &s, SQRT2).unwrap();
        assert!((f[0] - 3.5).abs() < 1e-12);
        assert!((f[1] - 3.5).abs() < 1e-12);
    }

    #[test]
    fn lsr_path_recovers_dc() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let basis = eigendecompose(&l).unwrap();
        let s = SampleSet::new(3, vec![0, 2], vec![1.0, 1.0]).unwrap();
        let f = lsr(&basis, &s, SQRT2).unwrap();
        assert!((f[1] - SQRT2).abs() < 1e-12, "{f}");
        assert_eq!((f[0], f[2]), (1.0, 1.0));
    }

    #[test]
    fn lsr_error_paths() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let basis = eigendecompose(&l).unwrap();
        let s = SampleSet::new(3, vec![0], vec![1.0]).unwrap();
        assert!(matches!(lsr(&basis, &s, 0.0), Err(Error::NoBasisVectors(_))));
        // band of size 2 from a single sample
        assert!(matches!(lsr(&basis, &s, 1.5), Err(Error::RankDeficient { .. })));
        let ends = SampleSet::new(3, vec![0, 2], vec![1.0, 1.0]).unwrap();
        assert!(matches!(lsr(&basis, &ends, 2.5), Err(Error::RankDeficient { rank: 2, k: 3 })));
    }

    #[test]
    fn ilsr_path_matches_lsr() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = SampleSet::new(3, vec![0, 2], vec![1.0, 1.0]).unwrap();
        let r = ilsr(&l, &s, SQRT2, FilterMode::Ideal, &StoppingRule::new(2000, 1e-9)).unwrap();
        assert!(r.converged());
        assert!((r.signal[1] - SQRT2).abs() < 1e-6, "{}", r.signal);
    }

    #[test]
    fn ilsr_recovers_bandlimited_signal() {
        let edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.5), (4, 0, 1.0), (1, 3, 1.0)];
        let l = lap(5, &edges);
        let basis = eigendecompose(&l).unwrap();
        let s0 = SampleSet::new(5, vec![0, 2, 4], vec![0.0; 3]).unwrap();
        let c = cutoff_frequency_with(&l, &s0, &basis).unwrap();
        assert!(c.k >= 1);
        let truth: GraphSignal = basis.vectors().columns(0, c.k).column_sum();
        let s = SampleSet::new(5, vec![0, 2, 4], vec![truth[0], truth[2], truth[4]]).unwrap();
        let r = ilsr(&l, &s, c.omega, FilterMode::Ideal, &StoppingRule::new(5000, 1e-12)).unwrap();
        assert!((r.signal - &truth).norm() < 1e-6);
    }

    #[test]
    fn ilsr_polynomial_runs_and_keeps_samples() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = SampleSet::new(3, vec![0, 2], vec![1.0, 2.0]).unwrap();
        let r = ilsr(&l, &s, SQRT2, FilterMode::Polynomial(25), &StoppingRule::default()).unwrap();
        assert_eq!((r.signal[0], r.signal[2]), (1.0, 2.0));
        assert!(r.signal[1].is_finite());
    }

    #[test]
    fn ilsr_reports_non_convergence() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = SampleSet::new(3, vec![0, 2], vec![1.0, 1.0]).unwrap();
        let r = ilsr(&l, &s, SQRT2, FilterMode::Ideal, &StoppingRule::new(1, 0.0)).unwrap();
        assert_eq!(r.status, IterStatus::NotConverged);
        assert_eq!(r.iterations, 1);
        assert_eq!((r.signal[0], r.signal[2]), (1.0, 1.0));
        assert!(ilsr(&l, &s, 0.0, FilterMode::Ideal, &StoppingRule::default()).is_err());
    }
}
