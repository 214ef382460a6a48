use crate::error::{Error, Result};
use crate::recsys::RatingScale;

/// Root mean squared error divided by the width of the rating scale.
pub fn normalized_rmse(pred: &[f64], truth: &[f64], scale: RatingScale) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / pred.len() as f64).sqrt() / scale.width())
}
