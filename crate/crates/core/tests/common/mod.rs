#![allow(dead_code)]

use graphterp::recsys::{Rating, RatingMatrix, RatingScale};
use graphterp::spectral::EigenBasis;
use graphterp::{Graph, SampleSet};
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with unit weights, redrawn until connected.
pub fn connected_er(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        if g.components().iter().all(|&c| c == 0) {
            return g;
        }
    }
}

/// Erdős–Rényi graph with weights in (0.1, 1].
pub fn weighted_er(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, 0.1 + 0.9 * rng.random::<f64>()));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random sample set of size `m` with random values.
pub fn random_samples(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SampleSet {
    let mut vertices: Vec<usize> = (0..n).collect();
    vertices.shuffle(rng);
    vertices.truncate(m);
    let values = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    SampleSet::new(n, vertices, values).unwrap()
}

/// Random vector with entries uniform in [-1, 1).
pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Random combination of the first `k` eigenvectors.
pub fn planted(rng: &mut ChaCha8Rng, basis: &EigenBasis, k: usize) -> DVector<f64> {
    let coeffs = random_vector(rng, k);
    basis.vectors().columns(0, k) * coeffs
}

/// Samples of `f` on the vertices of `s`.
pub fn resample(s: &SampleSet, f: &DVector<f64>) -> SampleSet {
    let values = s.known().iter().map(|&v| f[v]).collect();
    SampleSet::new(s.num_vertices(), s.known().to_vec(), values).unwrap()
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Synthetic MovieLens-scale ratings: users have a taste offset and items
/// a quality offset.
pub fn synthetic_ratings(rng: &mut ChaCha8Rng, users: usize, items: usize, density: f64) -> RatingMatrix {
    let taste: Vec<f64> = (0..users).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quality: Vec<f64> = (0..items).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut entries = Vec::new();
    for user in 0..users {
        for item in 0..items {
            if rng.random::<f64>() < density {
                let r = (3.0 + taste[user] + quality[item] + rng.random_range(-0.7..0.7)).round().clamp(1.0, 5.0);
                entries.push(Rating { user, item, value: r });
            }
        }
    }
    RatingMatrix::new(
        (0..users).map(|u| format!("u{u}")).collect(),
        (0..items).map(|i| format!("i{i}")).collect(),
        entries,
        RatingScale { min: 1.0, max: 5.0 },
    )
    .unwrap()
}

/// Graphs on 2..`max_n` vertices with random positive weights; may be
/// disconnected or have isolated vertices.
pub fn arb_graph(max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (2..max_n)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n, 0.05f64..2.0), 0..3 * n)))
        .prop_map(|(n, raw)| {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(i, j, _)| i != j && seen.insert((i.min(j), i.max(j))))
                .collect();
            Graph::from_edges(n, &edges).unwrap()
        })
}
