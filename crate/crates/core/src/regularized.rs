//! Regularized interpolation: minimize `‖J (f_du - x)‖² + α ‖H x‖²` where
//! `H` is a high-pass spectral filter, either in closed form or by the
//! gradient-style iteration
//! `f_{k+1} = (I - βα HᵗH) f_k + β JᵗJ (f_du - f_k)`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::iterate::{FilterMode, IterResult, IterStatus, StoppingRule};
use crate::laplacian::NormalizedLaplacian;
use crate::signal::{GraphSignal, SampleSet};
use crate::spectral::{
    chebyshev_coeffs, eigendecompose, DenseOperator, EigenBasis, LinearOperator, PolyOperator,
    SpectralKernel,
};

/// Pivot ratio below which the regularized system is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// An update this many times larger than the first one means the step size
/// is outside the stable range.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct RegConfig {
    pub alpha: f64,
    /// Step size of the iterative solver; `None` selects [`RegConfig::default_beta`].
    pub beta: Option<f64>,
    pub kernel: SpectralKernel,
    pub stop: StoppingRule,
}

impl RegConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        let cfg = Self { alpha, beta: None, kernel: SpectralKernel::ExpHighpass, stop: StoppingRule::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_kernel(mut self, kernel: SpectralKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
            }
        }
        Ok(())
    }

    /// Upper bound on `‖JᵗJ + α HᵗH‖` over the spectrum `[0, 2]`.
    pub fn curvature_bound(&self) -> f64 {
        1.0 + self.alpha * self.kernel.clone().squared().max_on_spectrum()
    }

    /// Step sizes below this keep the iteration stable.
    pub fn beta_bound(&self) -> f64 {
        2.0 / self.curvature_bound()
    }

    /// Half the stability limit.
    pub fn default_beta(&self) -> f64 {
        1.0 / self.curvature_bound()
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| self.default_beta())
    }
}

/// `‖J (f_du - x)‖² + α xᵗ Q x` with `Q = HᵗH`.
pub fn objective(hth: &impl LinearOperator, samples: &SampleSet, alpha: f64, x: &GraphSignal) -> f64 {
    let fit: f64 = samples
        .known()
        .iter()
        .zip(samples.known_values())
        .map(|(&v, &y)| (y - x[v]).powi(2))
        .sum();
    let mut qx = DVector::zeros(x.len());
    hth.apply_into(x.as_slice(), qx.as_mut_slice());
    fit + alpha * x.dot(&qx)
}

/// Closed-form minimizer `(JᵗJ + α HᵗH)⁻¹ f_du` with `HᵗH` formed from the
/// eigenbasis.
pub fn rbm_closed_form(basis: &EigenBasis, samples: &SampleSet, cfg: &RegConfig) -> Result<GraphSignal> {
    cfg.validate()?;
    samples.check_len(basis.size())?;
    let hth = DenseOperator::spectral(basis, &cfg.kernel.clone().squared());
    rbm_with(hth.matrix(), samples, cfg.alpha)
}

/// Closed-form minimizer for an explicit `HᵗH` matrix.
pub fn rbm_with(hth: &DMatrix<f64>, samples: &SampleSet, alpha: f64) -> Result<GraphSignal> {
    samples.check_len(hth.nrows())?;
    let mut system = hth * alpha;
    for &v in samples.known() {
        system[(v, v)] += 1.0;
    }
    let chol = Cholesky::new(system).ok_or(Error::SingularSystem)?;
    let pivots = chol.l_dirty().diagonal();
    let (lo, hi) = pivots.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if !(lo * lo > SINGULAR_PIVOT_RATIO * hi * hi) {
        return Err(Error::SingularSystem);
    }
    Ok(chol.solve(&samples.du_signal()))
}

/// Iterative regularized reconstruction. In polynomial mode `HᵗH` is a
/// single Chebyshev filter of the squared kernel.
pub fn irbm(
    lap: &NormalizedLaplacian,
    samples: &SampleSet,
    cfg: &RegConfig,
    mode: FilterMode,
) -> Result<IterResult> {
    cfg.validate()?;
    samples.check_len(lap.size())?;
    let squared = cfg.kernel.clone().squared();
    match mode {
        FilterMode::Ideal => {
            let basis = eigendecompose(lap)?;
            let hth = DenseOperator::spectral(&basis, &squared);
            irbm_with(&hth, samples, cfg.alpha, cfg.beta(), &cfg.stop, |_| {})
        }
        FilterMode::Polynomial(degree) => {
            let filter = chebyshev_coeffs(&squared, degree)?;
            let hth = PolyOperator::new(lap, &filter);
            irbm_with(&hth, samples, cfg.alpha, cfg.beta(), &cfg.stop, |_| {})
        }
    }
}

/// The regularized iteration for an arbitrary `HᵗH` operator. `on_iterate`
/// sees `f_0, f_1, ...`.
pub fn irbm_with(
    hth: &impl LinearOperator,
    samples: &SampleSet,
    alpha: f64,
    beta: f64,
    stop: &StoppingRule,
    mut on_iterate: impl FnMut(&GraphSignal),
) -> Result<IterResult> {
    samples.check_len(hth.dim())?;
    let n = samples.num_vertices();
    let mut current = samples.du_signal();
    on_iterate(&current);

    let mut qx = DVector::zeros(n);
    let mut step = DVector::zeros(n);
    let mut first_step = None;
    let mut status = IterStatus::NotConverged;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while iterations < stop.max_iters {
        hth.apply_into(current.as_slice(), qx.as_mut_slice());
        // step = -β (α Q x + Jᵗ J (x - f_du))
        for i in 0..n {
            step[i] = -beta * alpha * qx[i];
        }
        for (&v, &y) in samples.known().iter().zip(samples.known_values()) {
            step[v] += beta * (y - current[v]);
        }
        iterations += 1;

        let change = step.norm();
        let norm = current.norm();
        current += &step;
        last_change = if norm > 0.0 { change / norm } else { change };
        on_iterate(&current);

        let first = *first_step.get_or_insert(change);
        if !change.is_finite() || change > DIVERGENCE_FACTOR * first {
            return Err(Error::DivergenceDetected { iterations, norm: current.norm() });
        }
        if stop.reached(change, norm) {
            status = IterStatus::Converged;
            break;
        }
    }
    Ok(IterResult { signal: current, iterations, status, last_change })
}
