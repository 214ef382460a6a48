use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Per-user reweighting of links between known items by rating agreement:
/// `w' = w · exp(-(r_i - r_j)² / (2 σ_r²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralConfig {
    pub sigma_r: f64,
    pub enabled: bool,
}

impl Default for BilateralConfig {
    fn default() -> Self {
        Self { sigma_r: 1.0, enabled: true }
    }
}

impl BilateralConfig {
    pub fn new(sigma_r: f64) -> Result<Self> {
        let cfg = Self { sigma_r, enabled: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_r > 0.0 && self.sigma_r.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_r must be positive, got {}", self.sigma_r)));
        }
        Ok(())
    }
}

/// Applies the bilateral factor to every edge whose endpoints both have a
/// known rating in `known` (`(vertex, rating)` pairs). Other edges keep their
/// weight.
pub fn bilateral_adjust(g: &Graph, known: &[(usize, f64)], cfg: &BilateralConfig) -> Result<Graph> {
    if !cfg.enabled {
        return Ok(g.clone());
    }
    cfg.validate()?;
    let mut rating = vec![None; g.num_vertices()];
    for &(v, r) in known {
        if v >= g.num_vertices() {
            return Err(Error::IndexOutOfRange { index: v, len: g.num_vertices() });
        }
        rating[v] = Some(r);
    }
    let denom = 2.0 * cfg.sigma_r * cfg.sigma_r;
    Ok(g.map_weights(|i, j, w| match (rating[i], rating[j]) {
        (Some(ri), Some(rj)) => {
            let adjusted = w * (-(ri - rj).powi(2) / denom).exp();
            // exp underflow would silently delete the edge
            adjusted.max(f64::MIN_POSITIVE)
        }
        _ => w,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1, 0.5), (1, 2, 0.25), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn equal_ratings_keep_weight() {
        let g = triangle();
        let out = bilateral_adjust(&g, &[(0, 3.0), (1, 3.0)], &BilateralConfig::default()).unwrap();
        assert_eq!(out.weight(0, 1), 0.5);
    }

    #[test]
    fn disabled_is_identity() {
        let g = triangle();
        let out = bilateral_adjust(&g, &[(0, 1.0), (1, 5.0)], &BilateralConfig::disabled()).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn gaussian_factor() {
        let g = triangle();
        let out = bilateral_adjust(&g, &[(0, 1.0), (1, 5.0)], &BilateralConfig::new(2.0).unwrap()).unwrap();
        assert!((out.weight(0, 1) - 0.5 * (-2f64).exp()).abs() < 1e-15);
        assert!((out.weight(0, 1) - 0.06767).abs() < 1e-5);
        // vertex 2 is unknown: its edges stay
        assert_eq!(out.weight(1, 2), 0.25);
        assert_eq!(out.weight(0, 2), 1.0);
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(BilateralConfig::new(0.0).is_err());
        let cfg = BilateralConfig { sigma_r: -1.0, enabled: true };
        assert!(bilateral_adjust(&triangle(), &[], &cfg).is_err());
    }
}
