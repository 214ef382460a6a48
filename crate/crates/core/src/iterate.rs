//! Stopping rules and results shared by the iterative solvers.

use crate::signal::GraphSignal;

/// Stop when `‖f_{k+1} - f_k‖ ≤ tol · ‖f_k‖` or after `max_iters` updates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StoppingRule {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-6 }
    }
}

impl StoppingRule {
    pub fn new(max_iters: usize, tol: f64) -> Self {
        Self { max_iters, tol }
    }

    pub(crate) fn reached(&self, change: f64, norm: f64) -> bool {
        change <= self.tol * norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterStatus {
    Converged,
    /// `max_iters` was hit first; the last iterate is still returned.
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct IterResult {
    pub signal: GraphSignal,
    pub iterations: usize,
    pub status: IterStatus,
    /// Relative size of the last update.
    pub last_change: f64,
}

impl IterResult {
    pub fn converged(&self) -> bool {
        self.status == IterStatus::Converged
    }
}

/// Which realization of a spectral filter an iterative solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Exact spectral filter through the eigendecomposition.
    Ideal,
    /// Chebyshev polynomial of the given degree in the Laplacian.
    Polynomial(usize),
}
