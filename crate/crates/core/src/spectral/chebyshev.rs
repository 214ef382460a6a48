use std::f64::consts::PI;
use std::fmt::Write as _;

use super::SpectralKernel;
use crate::error::{Error, Result};

pub const DEFAULT_DEGREE: usize = 25;

/// Truncated Chebyshev expansion `p(λ) = Σ c_j T_j(λ - 1)` of a spectral
/// kernel over `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFilter {
    tag: String,
    coeffs: Vec<f64>,
}

/// Chebyshev coefficients of `kernel` up to `degree`, by Gauss–Chebyshev
/// quadrature with `4 (degree + 1)` nodes.
pub fn chebyshev_coeffs(kernel: &SpectralKernel, degree: usize) -> Result<ChebyshevFilter> {
    if degree == 0 {
        return Err(Error::InvalidParameter("Chebyshev degree must be at least 1".into()));
    }
    let nodes = 4 * (degree + 1);
    let thetas: Vec<f64> = (0..nodes).map(|k| PI * (k as f64 + 0.5) / nodes as f64).collect();
    let values: Vec<f64> = thetas.iter().map(|t| kernel.eval(t.cos() + 1.0)).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel {} is not finite: {bad}", kernel.tag())));
    }
    let scale = 2.0 / nodes as f64;
    let mut coeffs: Vec<f64> = (0..=degree)
        .map(|j| {
            scale * thetas.iter().zip(&values).map(|(t, h)| h * (j as f64 * t).cos()).sum::<f64>()
        })
        .collect();
    coeffs[0] *= 0.5;
    Ok(ChebyshevFilter { tag: kernel.tag(), coeffs })
}

impl ChebyshevFilter {
    pub fn from_coeffs(tag: impl Into<String>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("no Chebyshev coefficients".into()));
        }
        Ok(Self { tag: tag.into(), coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// `p(λ)` by Clenshaw's recurrence.
    pub fn eval(&self, lambda: f64) -> f64 {
        let x = lambda - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }

    /// Largest `|p(λ) - h(λ)|` over `points` equispaced samples of `[0, 2]`.
    pub fn max_error(&self, kernel: &SpectralKernel, points: usize) -> f64 {
        let step = 2.0 / (points - 1) as f64;
        (0..points)
            .map(|i| {
                let l = i as f64 * step;
                (self.eval(l) - kernel.eval(l)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// One-line text form: `tag<TAB>degree<TAB>c0 c1 ...`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\t{}\t", self.tag, self.degree());
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{c:e}").unwrap();
        }
        s
    }

    pub fn from_text(line: &str) -> Result<Self> {
        let mut parts = line.trim_end().split('\t');
        let (Some(tag), Some(degree), Some(coeffs), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::parse(1, "expected `tag<TAB>degree<TAB>coeffs`"));
        };
        let degree: usize = degree.parse().map_err(|_| Error::parse(1, "bad degree"))?;
        let coeffs = coeffs
            .split(' ')
            .map(|c| c.parse::<f64>().map_err(|_| Error::parse(1, format!("bad coefficient {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != degree + 1 {
            return Err(Error::parse(1, format!("degree {degree} needs {} coefficients", degree + 1)));
        }
        Self::from_coeffs(tag, coeffs)
    }
}
