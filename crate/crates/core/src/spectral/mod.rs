//! Spectral machinery on the normalized Laplacian: eigenbasis and graph
//! Fourier transform, spectral kernels, and Chebyshev polynomial filters.

mod chebyshev;
mod eigen;
mod kernel;
mod operator;

pub use chebyshev::{chebyshev_coeffs, ChebyshevFilter, DEFAULT_DEGREE};
pub use eigen::{eigendecompose, gft, igft, EigenBasis};
pub use kernel::{SpectralKernel, BAND_EPS};
pub use operator::{apply_ideal_filter, apply_poly_filter, DenseOperator, LinearOperator, PolyOperator};
