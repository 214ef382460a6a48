//! Interpolation of signals on graph vertices from a subset of samples.
//!
//! Three reconstruction families are provided:
//!
//! - band-limited least squares ([`bandlimited::lsr`]) and its iterative
//!   projection counterpart ([`bandlimited::ilsr`]), which can run on an
//!   exact spectral low-pass filter or a Chebyshev polynomial in the
//!   Laplacian;
//! - regularized reconstruction trading data fit against high-frequency
//!   energy ([`regularized::rbm_closed_form`], [`regularized::irbm`]);
//! - a collaborative-filtering pipeline ([`recsys`]) and cross-validation
//!   harness ([`eval`]) that apply the above to item-item similarity graphs.

pub mod bandlimited;
pub mod edgelist;
pub mod error;
pub mod eval;
pub mod graph;
pub mod iterate;
pub mod laplacian;
pub mod recsys;
pub mod regularized;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{induce_subgraph, knn_sparsify, knn_sparsify_among, Graph, IndexMap};
pub use iterate::{FilterMode, IterResult, IterStatus, StoppingRule};
pub use laplacian::NormalizedLaplacian;
pub use signal::{GraphSignal, SampleSet};
