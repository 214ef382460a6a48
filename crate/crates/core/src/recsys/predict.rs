use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bilateral_adjust, BilateralConfig, RatingMatrix, RatingScale};
use crate::bandlimited::{lsr, sigma_min_sq, smooth_lowpass};
use crate::error::{Error, Result};
use crate::graph::{induce_subgraph, knn_sparsify, knn_sparsify_among, Graph, IndexMap};
use crate::iterate::{FilterMode, IterStatus, StoppingRule};
use crate::laplacian::NormalizedLaplacian;
use crate::regularized::{rbm_with, RegConfig};
use crate::signal::SampleSet;
use crate::spectral::{
    chebyshev_coeffs, eigendecompose, DenseOperator, EigenBasis, PolyOperator, SpectralKernel,
    DEFAULT_DEGREE,
};
use crate::{bandlimited, regularized};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lsr,
    Ilsr,
    Rbm,
    Irbm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lsr, Method::Ilsr, Method::Rbm, Method::Irbm];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Lsr => "lsr",
            Method::Ilsr => "ilsr",
            Method::Rbm => "rbm",
            Method::Irbm => "irbm",
        }
    }

    /// Whether the method depends on the regularization weight.
    pub fn is_regularized(&self) -> bool {
        matches!(self, Method::Rbm | Method::Irbm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Which neighbors a vertex may select during KNN sparsification of the
/// per-user subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnScope {
    /// Only items the user has rated. Test items then connect to known
    /// items exclusively.
    #[default]
    Known,
    /// Any item in the subgraph.
    All,
}

/// Offset removed from the known ratings before interpolation and added
/// back to the predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    #[default]
    UserMean,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub knn_scope: KnnScope,
    pub bilateral: BilateralConfig,
    pub centering: Centering,
    /// Filter realization for the iterative methods.
    pub filter_mode: FilterMode,
    pub stop: StoppingRule,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 30,
            knn_scope: KnnScope::Known,
            bilateral: BilateralConfig::default(),
            centering: Centering::UserMean,
            filter_mode: FilterMode::Polynomial(DEFAULT_DEGREE),
            stop: StoppingRule::default(),
            alpha: 0.05,
            beta: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.bilateral.enabled {
            self.bilateral.validate()?;
        }
        if let FilterMode::Polynomial(0) = self.filter_mode {
            return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
        }
        self.reg_config().map(|_| ())
    }

    pub fn reg_config(&self) -> Result<RegConfig> {
        let mut cfg = RegConfig::new(self.alpha)?.with_stop(self.stop);
        if let Some(beta) = self.beta {
            cfg = cfg.with_beta(beta);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One user's interpolation problem on the item graph: known items first,
/// test items after, in the order given.
#[derive(Debug, Clone)]
pub struct UserContext {
    user: usize,
    known: Vec<(usize, f64)>,
    test_items: Vec<usize>,
    subgraph: Graph,
    index: IndexMap,
}

impl UserContext {
    /// Induced subgraph of `g0` over the user's known and test items after
    /// KNN sparsification, without weight adjustment.
    pub fn sparsified(
        g0: &Graph,
        user: usize,
        known: &[(usize, f64)],
        test_items: &[usize],
        k: usize,
        scope: KnnScope,
    ) -> Result<Self> {
        if known.is_empty() {
            return Err(Error::ColdStartUser(user));
        }
        let vertices: Vec<usize> = known.iter().map(|&(i, _)| i).chain(test_items.iter().copied()).collect();
        // duplicates across S and U are rejected here
        let (induced, index) = induce_subgraph(g0, &vertices)?;
        let subgraph = match scope {
            KnnScope::All => knn_sparsify(&induced, k)?,
            KnnScope::Known => {
                let candidates: Vec<bool> = (0..vertices.len()).map(|v| v < known.len()).collect();
                knn_sparsify_among(&induced, k, &candidates)?
            }
        };
        Ok(Self { user, known: known.to_vec(), test_items: test_items.to_vec(), subgraph, index })
    }

    /// Copy with the bilateral adjustment applied to links between known
    /// items.
    pub fn adjusted(&self, cfg: &BilateralConfig) -> Result<Self> {
        let local: Vec<(usize, f64)> = self.known.iter().enumerate().map(|(v, &(_, r))| (v, r)).collect();
        Ok(Self { subgraph: bilateral_adjust(&self.subgraph, &local, cfg)?, ..self.clone() })
    }

    /// Sparsified and adjusted context.
    pub fn assemble(
        g0: &Graph,
        user: usize,
        known: &[(usize, f64)],
        test_items: &[usize],
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        Self::sparsified(g0, user, known, test_items, cfg.k, cfg.knn_scope)?.adjusted(&cfg.bilateral)
    }

    pub fn user(&self) -> usize {
        self.user
    }

    /// `(item, rating)` pairs; item `known()[i].0` is local vertex `i`.
    pub fn known(&self) -> &[(usize, f64)] {
        &self.known
    }

    /// Test item `test_items()[j]` is local vertex `known().len() + j`.
    pub fn test_items(&self) -> &[usize] {
        &self.test_items
    }

    pub fn subgraph(&self) -> &Graph {
        &self.subgraph
    }

    pub fn index(&self) -> &IndexMap {
        &self.index
    }

    pub fn mean_rating(&self) -> f64 {
        self.known.iter().map(|&(_, r)| r).sum::<f64>() / self.known.len() as f64
    }
}

/// Predictions for one user's test items, in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPrediction {
    pub predictions: Vec<f64>,
    /// Test items with no path to a known item; they receive the user mean.
    pub isolated: usize,
    /// The interpolation failed numerically and every test item received
    /// the user mean.
    pub fallback: bool,
    pub iterations: usize,
    pub status: Option<IterStatus>,
}

/// Counters accumulated over many users.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub users: usize,
    pub predictions: usize,
    pub isolated_items: usize,
    pub cold_start_users: usize,
    pub fallback_users: usize,
    pub not_converged: usize,
}

impl Diagnostics {
    pub fn record(&mut self, p: &UserPrediction) {
        self.users += 1;
        self.predictions += p.predictions.len();
        self.isolated_items += p.isolated;
        self.fallback_users += usize::from(p.fallback);
        self.not_converged += usize::from(p.status == Some(IterStatus::NotConverged));
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.users += other.users;
        self.predictions += other.predictions;
        self.isolated_items += other.isolated_items;
        self.cold_start_users += other.cold_start_users;
        self.fallback_users += other.fallback_users;
        self.not_converged += other.not_converged;
    }
}

/// Parameters of a single solve on a prepared [`UserProblem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub filter_mode: FilterMode,
    pub stop: StoppingRule,
}

impl From<&PipelineConfig> for SolveParams {
    fn from(cfg: &PipelineConfig) -> Self {
        Self { alpha: cfg.alpha, beta: cfg.beta, filter_mode: cfg.filter_mode, stop: cfg.stop }
    }
}

struct Reduced {
    lap: NormalizedLaplacian,
    samples: SampleSet,
    basis: Option<EigenBasis>,
    sigma_min_sq: Option<f64>,
    lowpass: Vec<(FilterMode, DenseOperator)>,
    hth: Vec<(FilterMode, DenseOperator)>,
}

/// A user context reduced to the vertices that matter, with the spectral
/// quantities cached across solves with different methods and parameters.
pub struct UserProblem {
    offset: f64,
    scale: RatingScale,
    /// Position of every test item in the reduced problem.
    test_local: Vec<Option<usize>>,
    reduced: Option<Reduced>,
}

impl UserProblem {
    pub fn new(ctx: &UserContext, centering: Centering, scale: RatingScale) -> Result<Self> {
        let n_known = ctx.known.len();
        let offset = match centering {
            Centering::UserMean => ctx.mean_rating(),
            Centering::None => 0.0,
        };
        // drop test items whose component holds no known item
        let labels = ctx.subgraph.components();
        let mut anchored = vec![false; ctx.subgraph.num_vertices()];
        for v in 0..n_known {
            anchored[labels[v]] = true;
        }
        let mut vertices: Vec<usize> = (0..n_known).collect();
        let mut test_local = Vec::with_capacity(ctx.test_items.len());
        for j in 0..ctx.test_items.len() {
            let v = n_known + j;
            if anchored[labels[v]] {
                test_local.push(Some(vertices.len()));
                vertices.push(v);
            } else {
                test_local.push(None);
            }
        }
        let reduced = if vertices.len() > n_known {
            let (g, _) = induce_subgraph(&ctx.subgraph, &vertices)?;
            let values = ctx.known.iter().map(|&(_, r)| r - offset).collect();
            let samples = SampleSet::new(vertices.len(), (0..n_known).collect(), values)?;
            Some(Reduced {
                lap: NormalizedLaplacian::new(&g),
                samples,
                basis: None,
                sigma_min_sq: None,
                lowpass: Vec::new(),
                hth: Vec::new(),
            })
        } else {
            None
        };
        Ok(Self { offset, scale, test_local, reduced })
    }

    pub fn isolated(&self) -> usize {
        self.test_local.iter().filter(|p| p.is_none()).count()
    }

    /// Size of the reduced interpolation problem (0 when every test item is
    /// isolated).
    pub fn size(&self) -> usize {
        self.reduced.as_ref().map_or(0, |r| r.samples.num_vertices())
    }

    pub fn solve(&mut self, method: Method, params: &SolveParams) -> Result<UserPrediction> {
        let isolated = self.isolated();
        let Some(red) = self.reduced.as_mut() else {
            return Ok(self.finish(None, isolated, false, 0, None));
        };
        let outcome = match method {
            Method::Lsr => red.lsr().map(|f| (f, 0, None)),
            Method::Ilsr => red.ilsr(params),
            Method::Rbm => red.rbm(params).map(|f| (f, 0, None)),
            Method::Irbm => red.irbm(params),
        };
        match outcome {
            Ok((f, iterations, status)) => Ok(self.finish(Some(f.as_slice()), isolated, false, iterations, status)),
            Err(Error::SingularSystem | Error::RankDeficient { .. } | Error::NoBasisVectors(_)) => {
                Ok(self.finish(None, isolated, true, 0, None))
            }
            Err(e) => Err(e),
        }
    }

    fn finish(
        &self,
        signal: Option<&[f64]>,
        isolated: usize,
        fallback: bool,
        iterations: usize,
        status: Option<IterStatus>,
    ) -> UserPrediction {
        let predictions = self
            .test_local
            .iter()
            .map(|pos| {
                let centered = match (pos, signal) {
                    (Some(v), Some(f)) => f[*v],
                    _ => 0.0,
                };
                self.scale.clip(centered + self.offset)
            })
            .collect();
        UserPrediction { predictions, isolated, fallback, iterations, status }
    }
}

impl Reduced {
    fn basis(&mut self) -> Result<&EigenBasis> {
        if self.basis.is_none() {
            self.basis = Some(eigendecompose(&self.lap)?);
        }
        Ok(self.basis.as_ref().expect("basis computed above"))
    }

    fn omega(&mut self) -> Result<f64> {
        if self.sigma_min_sq.is_none() {
            self.sigma_min_sq = Some(sigma_min_sq(&self.lap, &self.samples)?);
        }
        let omega = self.sigma_min_sq.expect("cutoff computed above").max(0.0).sqrt();
        if omega > 0.0 {
            Ok(omega)
        } else {
            Err(Error::NoBasisVectors(omega))
        }
    }

    fn lsr(&mut self) -> Result<DVector<f64>> {
        let omega = self.omega()?;
        self.basis()?;
        lsr(self.basis.as_ref().expect("basis computed above"), &self.samples, omega)
    }

    fn ilsr(&mut self, params: &SolveParams) -> Result<(DVector<f64>, usize, Option<IterStatus>)> {
        let omega = self.omega()?;
        let mode = params.filter_mode;
        if !self.lowpass.iter().any(|(m, _)| *m == mode) {
            let op = match mode {
                FilterMode::Ideal => DenseOperator::spectral(self.basis()?, &SpectralKernel::IdealLowpass { omega }),
                FilterMode::Polynomial(degree) => {
                    let filter = chebyshev_coeffs(&smooth_lowpass(omega), degree)?;
                    PolyOperator::new(&self.lap, &filter).materialize()
                }
            };
            self.lowpass.push((mode, op));
        }
        let op = cached(&self.lowpass, mode);
        let r = bandlimited::ilsr_with(op, &self.samples, &params.stop, |_| {})?;
        Ok((r.signal, r.iterations, Some(r.status)))
    }

    fn build_hth(&mut self, mode: FilterMode) -> Result<()> {
        if !self.hth.iter().any(|(m, _)| *m == mode) {
            let squared = SpectralKernel::ExpHighpass.squared();
            let op = match mode {
                FilterMode::Ideal => DenseOperator::spectral(self.basis()?, &squared),
                FilterMode::Polynomial(degree) => {
                    let filter = chebyshev_coeffs(&squared, degree)?;
                    PolyOperator::new(&self.lap, &filter).materialize()
                }
            };
            self.hth.push((mode, op));
        }
        Ok(())
    }

    fn rbm(&mut self, params: &SolveParams) -> Result<DVector<f64>> {
        self.build_hth(FilterMode::Ideal)?;
        rbm_with(cached(&self.hth, FilterMode::Ideal).matrix(), &self.samples, params.alpha)
    }

    fn irbm(&mut self, params: &SolveParams) -> Result<(DVector<f64>, usize, Option<IterStatus>)> {
        let mut cfg = RegConfig::new(params.alpha)?;
        if let Some(beta) = params.beta {
            cfg = cfg.with_beta(beta);
        }
        cfg.validate()?;
        let beta = cfg.beta();
        self.build_hth(params.filter_mode)?;
        let hth = cached(&self.hth, params.filter_mode);
        let r = regularized::irbm_with(hth, &self.samples, params.alpha, beta, &params.stop, |_| {})?;
        Ok((r.signal, r.iterations, Some(r.status)))
    }
}

fn cached(ops: &[(FilterMode, DenseOperator)], mode: FilterMode) -> &DenseOperator {
    &ops.iter().find(|(m, _)| *m == mode).expect("operator built before use").1
}

/// Predicts `user`'s ratings of `test_items` by graph interpolation on the
/// item graph `g0`.
pub fn predict_user(
    g0: &Graph,
    train: &RatingMatrix,
    user: usize,
    test_items: &[usize],
    method: Method,
    cfg: &PipelineConfig,
) -> Result<UserPrediction> {
    cfg.validate()?;
    let mut known: Vec<(usize, f64)> =
        train.entries().iter().filter(|e| e.user == user).map(|e| (e.item, e.value)).collect();
    known.sort_by_key(|&(i, _)| i);
    let ctx = UserContext::assemble(g0, user, &known, test_items, cfg)?;
    UserProblem::new(&ctx, cfg.centering, train.scale())?.solve(method, &SolveParams::from(cfg))
}

/// Rating used when nothing is known about the user: the item's mean, or
/// the scale midpoint for an unrated item.
pub fn cold_start_prediction(item_means: &[Option<f64>], scale: RatingScale, item: usize) -> f64 {
    scale.clip(item_means.get(item).copied().flatten().unwrap_or_else(|| scale.midpoint()))
}

/// Predicts every `(user, item)` pair, grouping by user and running users
/// in parallel. Output order follows `pairs`.
pub fn predict_pairs(
    g0: &Graph,
    train: &RatingMatrix,
    pairs: &[(usize, usize)],
    method: Method,
    cfg: &PipelineConfig,
) -> Result<(Vec<f64>, Diagnostics)> {
    cfg.validate()?;
    let by_user = train.by_user();
    let item_means = train.item_means();
    let scale = train.scale();
    let mut requests: Vec<Vec<usize>> = vec![Vec::new(); train.num_users()];
    for (pos, &(u, i)) in pairs.iter().enumerate() {
        if u >= train.num_users() {
            return Err(Error::IndexOutOfRange { index: u, len: train.num_users() });
        }
        if i >= train.num_items() {
            return Err(Error::IndexOutOfRange { index: i, len: train.num_items() });
        }
        requests[u].push(pos);
    }
    let params = SolveParams::from(cfg);
    let per_user: Vec<(Vec<(usize, f64)>, Diagnostics)> = requests
        .par_iter()
        .enumerate()
        .filter(|(_, positions)| !positions.is_empty())
        .map(|(u, positions)| -> Result<_> {
            let mut diag = Diagnostics::default();
            let items: Vec<usize> = positions.iter().map(|&p| pairs[p].1).collect();
            let values = if by_user[u].is_empty() {
                diag.users += 1;
                diag.cold_start_users += 1;
                diag.predictions += items.len();
                items.iter().map(|&i| cold_start_prediction(&item_means, scale, i)).collect()
            } else {
                let test = split_known(&by_user[u], &items);
                let ctx = UserContext::assemble(g0, u, &by_user[u], &test.unique, cfg)?;
                let p = UserProblem::new(&ctx, cfg.centering, scale)?.solve(method, &params)?;
                diag.record(&p);
                test.expand(&p.predictions)
            };
            Ok((positions.iter().copied().zip(values).collect(), diag))
        })
        .collect::<Result<_>>()?;

    let mut out = vec![f64::NAN; pairs.len()];
    let mut diag = Diagnostics::default();
    for (values, d) in per_user {
        for (pos, v) in values {
            out[pos] = v;
        }
        diag.merge(&d);
    }
    Ok((out, diag))
}

/// Requested items deduplicated and separated from the known ones.
struct TestItems {
    unique: Vec<usize>,
    /// For every request: index into `unique`, or the known rating.
    slots: Vec<std::result::Result<usize, f64>>,
}

impl TestItems {
    fn expand(&self, predictions: &[f64]) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match s {
                Ok(j) => predictions[*j],
                Err(r) => *r,
            })
            .collect()
    }
}

fn split_known(known: &[(usize, f64)], items: &[usize]) -> TestItems {
    let mut unique = Vec::new();
    let mut slots = Vec::with_capacity(items.len());
    for &item in items {
        if let Ok(k) = known.binary_search_by_key(&item, |&(i, _)| i) {
            slots.push(Err(known[k].1));
        } else if let Some(j) = unique.iter().position(|&u| u == item) {
            slots.push(Ok(j));
        } else {
            slots.push(Ok(unique.len()));
            unique.push(item);
        }
    }
    TestItems { unique, slots }
}
