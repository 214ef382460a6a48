use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::recsys::RatingMatrix;

/// Similarity-weighted mean of the known ratings on the `k` items most
/// similar to `item`. `known` is sorted by item. `None` when no rated item is
/// linked to `item`.
pub fn knn_predict(g0: &Graph, known: &[(usize, f64)], item: usize, k: usize) -> Option<f64> {
    let mut neighbors: Vec<(usize, f64, f64)> = g0
        .neighbors(item)
        .filter_map(|(j, w)| {
            known.binary_search_by_key(&j, |&(i, _)| i).ok().map(|pos| (j, w, known[pos].1))
        })
        .collect();
    if neighbors.is_empty() || k == 0 {
        return None;
    }
    neighbors.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    neighbors.truncate(k);
    let (num, den) = neighbors.iter().fold((0.0, 0.0), |(n, d), &(_, w, r)| (n + w * r, d + w));
    Some(num / den)
}

/// KNN baseline for one `(user, item)` pair with the pipeline's fallbacks:
/// the user's mean rating when no neighbor is rated.
pub fn knn_baseline_predict(train: &RatingMatrix, g0: &Graph, user: usize, item: usize, k: usize) -> Result<f64> {
    let mut known: Vec<(usize, f64)> =
        train.entries().iter().filter(|e| e.user == user).map(|e| (e.item, e.value)).collect();
    if known.is_empty() {
        return Err(Error::ColdStartUser(user));
    }
    known.sort_by_key(|&(i, _)| i);
    let mean = known.iter().map(|&(_, r)| r).sum::<f64>() / known.len() as f64;
    Ok(train.scale().clip(knn_predict(g0, &known, item, k).unwrap_or(mean)))
}
