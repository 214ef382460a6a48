use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Eigenvalues closer than this to an ideal cutoff are treated as lying
/// above it (the band is `λ < ω` strictly).
pub const BAND_EPS: f64 = 1e-9;

/// Spectral response `h(λ)` on `[0, 2]`.
#[derive(Clone)]
pub enum SpectralKernel {
    /// 1 below `omega`, 0 at or above.
    IdealLowpass { omega: f64 },
    /// Complement of [`SpectralKernel::IdealLowpass`].
    IdealHighpass { omega: f64 },
    /// Ideal low-pass with a raised-cosine transition of the given
    /// half-width centered at `omega`. Used before polynomial expansion to
    /// limit Gibbs ringing.
    SmoothLowpass { omega: f64, half_width: f64 },
    /// `exp(-1/λ)`, with value 0 at `λ = 0`.
    ExpHighpass,
    /// `h(λ)²` of the inner kernel.
    Squared(Box<SpectralKernel>),
    /// `c` everywhere.
    Constant(f64),
    /// `h(λ) = λ`.
    Identity,
    Custom { name: String, h: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl SpectralKernel {
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            SpectralKernel::IdealLowpass { omega } => {
                if lambda < omega - BAND_EPS {
                    1.0
                } else {
                    0.0
                }
            }
            SpectralKernel::IdealHighpass { omega } => {
                1.0 - SpectralKernel::IdealLowpass { omega: *omega }.eval(lambda)
            }
            SpectralKernel::SmoothLowpass { omega, half_width } => {
                let lo = omega - half_width;
                let hi = omega + half_width;
                if lambda <= lo {
                    1.0
                } else if lambda >= hi {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (lambda - lo) / (hi - lo)).cos())
                }
            }
            SpectralKernel::ExpHighpass => {
                if lambda <= 0.0 {
                    0.0
                } else {
                    (-1.0 / lambda).exp()
                }
            }
            SpectralKernel::Squared(inner) => {
                let v = inner.eval(lambda);
                v * v
            }
            SpectralKernel::Constant(c) => *c,
            SpectralKernel::Identity => lambda,
            SpectralKernel::Custom { h, .. } => h(lambda),
        }
    }

    pub fn squared(self) -> SpectralKernel {
        SpectralKernel::Squared(Box::new(self))
    }

    pub fn custom(name: impl Into<String>, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SpectralKernel::Custom { name: name.into(), h: Arc::new(h) }
    }

    /// Largest value of `h` on a fine grid over `[0, 2]`, including the ends.
    pub fn max_on_spectrum(&self) -> f64 {
        (0..=2000).map(|i| self.eval(i as f64 * 1e-3)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn tag(&self) -> String {
        match self {
            SpectralKernel::IdealLowpass { omega } => format!("ideal-lowpass({omega})"),
            SpectralKernel::IdealHighpass { omega } => format!("ideal-highpass({omega})"),
            SpectralKernel::SmoothLowpass { omega, half_width } => {
                format!("smooth-lowpass({omega},{half_width})")
            }
            SpectralKernel::ExpHighpass => "exp-highpass".to_string(),
            SpectralKernel::Squared(inner) => format!("squared({})", inner.tag()),
            SpectralKernel::Constant(c) => format!("constant({c})"),
            SpectralKernel::Identity => "identity".to_string(),
            SpectralKernel::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

impl fmt::Debug for SpectralKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}
