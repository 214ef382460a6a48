use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recsys::{Rating, RatingMatrix};

/// Partition of rating-entry indices into disjoint folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub seed: u64,
    /// Entry indices of every fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldSplit {
    pub fn num_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.folds.iter().map(Vec::len).collect()
    }

    /// Training matrix (every other fold) and test entries (fold `f`, in
    /// entry order).
    pub fn split(&self, data: &RatingMatrix, f: usize) -> (RatingMatrix, Vec<Rating>) {
        let mut in_test = vec![false; data.len()];
        for &i in &self.folds[f] {
            in_test[i] = true;
        }
        let entries = data.entries();
        let train = entries.iter().zip(&in_test).filter(|(_, &t)| !t).map(|(e, _)| *e).collect();
        let test = self.folds[f].iter().map(|&i| entries[i]).collect();
        (data.with_entries(train), test)
    }
}

/// Shuffles the entry indices with ChaCha8 seeded by `seed` and deals them
/// round-robin into `k` folds, so fold sizes differ by at most one.
pub fn kfold_split(data: &RatingMatrix, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    if data.len() < k {
        return Err(Error::TooFewEntries { needed: k, got: data.len() });
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(data.len() / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldSplit { seed, folds })
}

/// Random subset of at most `max` entries, kept in original order.
pub fn subsample(data: &RatingMatrix, max: usize, seed: u64) -> RatingMatrix {
    if data.len() <= max {
        return data.clone();
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(max);
    order.sort_unstable();
    data.with_entries(order.into_iter().map(|i| data.entries()[i]).collect())
}
