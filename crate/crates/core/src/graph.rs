//! Undirected weighted graphs without self-loops.
//!
//! Adjacency is kept in compressed sparse row form with every edge stored in
//! both directions and neighbor lists sorted by vertex index, so iteration
//! order is deterministic.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Undirected weighted graph with symmetric sparse adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
}

impl Graph {
    /// Builds a graph from an edge list. Each `(i, j, w)` sets both
    /// `W(i,j)` and `W(j,i)` to `w`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, len: n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            // NaN fails this comparison as well
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { i, j, weight: w });
            }
            directed.push((i, j, w));
            directed.push((j, i, w));
        }
        directed.sort_by_key(|e| (e.0, e.1));
        for pair in directed.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                let (i, j) = (pair[0].0.min(pair[0].1), pair[0].0.max(pair[0].1));
                return Err(Error::DuplicateEdge(i, j));
            }
        }
        Ok(Self::from_sorted_directed(n, &directed))
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_directed(n, &[])
    }

    // `directed` must be symmetric, sorted by (source, target), loop-free and
    // duplicate-free.
    fn from_sorted_directed(n: usize, directed: &[(usize, usize, f64)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(i, _, _) in directed {
            offsets[i + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<usize> = directed.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = directed.iter().map(|e| e.2).collect();
        let degrees = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();
        Self { n, offsets, targets, weights, degrees }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    /// Neighbors of `v` in ascending index order, with edge weights.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    pub fn neighbor_count(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// `W(i, j)`, zero when there is no edge.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.targets[range.clone()].binary_search(&j) {
            Ok(pos) => self.weights[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i).filter(move |&(j, _)| j > i).map(move |(j, w)| (i, j, w))
        })
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.offsets[v] == self.offsets[v + 1]
    }

    /// Returns a copy whose edge weights have been rewritten by `f(i, j, w)`
    /// for `i < j`. Edges mapped to a non-positive weight are dropped.
    pub fn map_weights(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Graph {
        let mut directed = Vec::with_capacity(self.targets.len());
        for (i, j, w) in self.edges() {
            let w = f(i, j, w);
            if w > 0.0 {
                directed.push((i, j, w));
                directed.push((j, i, w));
            }
        }
        directed.sort_by_key(|e| (e.0, e.1));
        Self::from_sorted_directed(self.n, &directed)
    }

    /// Connected component label for every vertex; labels are assigned in
    /// order of the smallest vertex of each component.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for root in 0..self.n {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = next;
            stack.push(root);
            while let Some(v) = stack.pop() {
                for (u, _) in self.neighbors(v) {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// Keeps, for every vertex, its `k` heaviest incident edges (ties broken by
/// smaller neighbor index). An edge survives when it is selected by either
/// endpoint.
pub fn knn_sparsify(g: &Graph, k: usize) -> Result<Graph> {
    knn_sparsify_among(g, k, &vec![true; g.num_vertices()])
}

/// Like [`knn_sparsify`], but each vertex only selects neighbors flagged in
/// `candidates`. An edge between two non-candidates can never survive.
pub fn knn_sparsify_among(g: &Graph, k: usize, candidates: &[bool]) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidParameter("knn sparsification needs k >= 1".into()));
    }
    let n = g.num_vertices();
    if candidates.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: candidates.len() });
    }
    let mut keep: Vec<(usize, usize)> = Vec::new();
    let mut scratch: Vec<(usize, f64)> = Vec::new();
    for i in 0..n {
        scratch.clear();
        scratch.extend(g.neighbors(i).filter(|&(j, _)| candidates[j]));
        if scratch.len() > k {
            scratch.select_nth_unstable_by(k - 1, by_weight_desc);
            scratch.truncate(k);
        }
        keep.extend(scratch.iter().map(|&(j, _)| (i.min(j), i.max(j))));
    }
    keep.sort_unstable();
    keep.dedup();
    let mut directed = Vec::with_capacity(keep.len() * 2);
    for (i, j) in keep {
        let w = g.weight(i, j);
        directed.push((i, j, w));
        directed.push((j, i, w));
    }
    directed.sort_by_key(|e| (e.0, e.1));
    Ok(Graph::from_sorted_directed(n, &directed))
}

fn by_weight_desc(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Local/original vertex correspondence produced by [`induce_subgraph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    to_original: Vec<usize>,
    to_local: Vec<Option<usize>>,
}

impl IndexMap {
    pub fn original(&self, local: usize) -> usize {
        self.to_original[local]
    }

    pub fn local(&self, original: usize) -> Option<usize> {
        self.to_local.get(original).copied().flatten()
    }

    pub fn originals(&self) -> &[usize] {
        &self.to_original
    }
}

/// Subgraph over `vertices` (in the given order) keeping every edge with both
/// endpoints in the list.
pub fn induce_subgraph(g: &Graph, vertices: &[usize]) -> Result<(Graph, IndexMap)> {
    let n = g.num_vertices();
    let mut to_local = vec![None; n];
    for (local, &v) in vertices.iter().enumerate() {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, len: n });
        }
        if to_local[v].replace(local).is_some() {
            return Err(Error::InvalidParameter(format!("vertex {v} listed twice")));
        }
    }
    let mut directed = Vec::new();
    for (local, &v) in vertices.iter().enumerate() {
        for (u, w) in g.neighbors(v) {
            if let Some(lu) = to_local[u] {
                directed.push((local, lu, w));
            }
        }
    }
    directed.sort_by_key(|e| (e.0, e.1));
    let sub = Graph::from_sorted_directed(vertices.len(), &directed);
    Ok((sub, IndexMap { to_original: vertices.to_vec(), to_local }))
}
