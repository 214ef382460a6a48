use serde::{Deserialize, Serialize};

use super::RatingMatrix;
use crate::error::Result;
use crate::graph::Graph;

/// How item rating vectors are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CosineMode {
    /// Full rating columns with missing ratings read as 0.
    #[default]
    ZeroFilled,
    /// Norms restricted to the users who rated both items.
    CoRatedOnly,
}

/// Item-item cosine similarity graph. Pairs with no co-rating user or a
/// non-positive similarity get no edge; unrated items are isolated.
pub fn cosine_item_graph(train: &RatingMatrix, mode: CosineMode) -> Result<Graph> {
    let n = train.num_items();
    let by_user = train.by_user();
    let by_item = train.by_item();
    let norms: Vec<f64> = by_item
        .iter()
        .map(|list| list.iter().map(|&(_, r)| r * r).sum::<f64>().sqrt())
        .collect();

    let mut dot = vec![0.0; n];
    let mut sq_i = vec![0.0; n];
    let mut sq_j = vec![0.0; n];
    let mut touched = vec![false; n];
    let mut touched_list = Vec::new();
    let mut edges = Vec::new();
    for i in 0..n {
        for &(u, ri) in &by_item[i] {
            for &(j, rj) in &by_user[u] {
                if j <= i {
                    continue;
                }
                if !touched[j] {
                    touched[j] = true;
                    touched_list.push(j);
                }
                dot[j] += ri * rj;
                sq_i[j] += ri * ri;
                sq_j[j] += rj * rj;
            }
        }
        touched_list.sort_unstable();
        for &j in &touched_list {
            let denom = match mode {
                CosineMode::ZeroFilled => norms[i] * norms[j],
                CosineMode::CoRatedOnly => (sq_i[j] * sq_j[j]).sqrt(),
            };
            if denom > 0.0 {
                let w = dot[j] / denom;
                if w > 0.0 {
                    edges.push((i, j, w));
                }
            }
            dot[j] = 0.0;
            sq_i[j] = 0.0;
            sq_j[j] = 0.0;
            touched[j] = false;
        }
        touched_list.clear();
    }
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recsys::{parse_ratings, DatasetFormat};

    fn ml(text: &str) -> RatingMatrix {
        parse_ratings(text, DatasetFormat::Movielens).unwrap()
    }

    #[test]
    fn parallel_columns_have_unit_weight() {
        let m = ml("1\ta\t4\t0\n2\ta\t2\t0\n1\tb\t4\t0\n2\tb\t2\t0\n");
        let g = cosine_item_graph(&m, CosineMode::ZeroFilled).unwrap();
        assert!((g.weight(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn never_co_rated_has_no_edge() {
        let m = ml("1\ta\t4\t0\n2\tb\t2\t0\n");
        let g = cosine_item_graph(&m, CosineMode::ZeroFilled).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn hand_computed_weight() {
        // i = (4, 2), j = (2, 4): (8 + 8) / (√20 √20) = 0.8
        let m = ml("1\ti\t4\t0\n2\ti\t2\t0\n1\tj\t2\t0\n2\tj\t4\t0\n");
        let g = cosine_item_graph(&m, CosineMode::ZeroFilled).unwrap();
        assert!((g.weight(0, 1) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn co_rated_mode_ignores_other_raters() {
        // item a also rated by user 3, which only counts in zero-filled norms
        let m = ml("1\ta\t4\t0\n2\ta\t2\t0\n3\ta\t5\t0\n1\tb\t4\t0\n2\tb\t2\t0\n");
        let zero = cosine_item_graph(&m, CosineMode::ZeroFilled).unwrap();
        let co = cosine_item_graph(&m, CosineMode::CoRatedOnly).unwrap();
        assert!((co.weight(0, 1) - 1.0).abs() < 1e-15);
        assert!((zero.weight(0, 1) - 20.0 / (45f64.sqrt() * 20f64.sqrt())).abs() < 1e-15);
    }
}
