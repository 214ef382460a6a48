use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::folds::{kfold_split, subsample};
use super::knn::knn_predict;
use super::metrics::normalized_rmse;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iterate::{FilterMode, StoppingRule};
use crate::recsys::{
    cold_start_prediction, cosine_item_graph, load_ratings, BilateralConfig, Centering, CosineMode,
    DatasetFormat, Diagnostics, KnnScope, Method, Rating, RatingMatrix, SolveParams, UserContext,
    UserPrediction, UserProblem,
};
use crate::spectral::DEFAULT_DEGREE;

/// Environment variable naming a directory searched for relative dataset
/// paths.
pub const DATA_DIR_ENV: &str = "GRAPHTERP_DATA_DIR";

/// Entry budget applied to datasets other than MovieLens.
pub const DEFAULT_MAX_ENTRIES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMethod {
    Lsr,
    Ilsr,
    Rbm,
    Irbm,
    Knn,
}

impl EvalMethod {
    pub fn graph_method(&self) -> Option<Method> {
        match self {
            EvalMethod::Lsr => Some(Method::Lsr),
            EvalMethod::Ilsr => Some(Method::Ilsr),
            EvalMethod::Rbm => Some(Method::Rbm),
            EvalMethod::Irbm => Some(Method::Irbm),
            EvalMethod::Knn => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.graph_method() {
            Some(m) => m.name(),
            None => "knn",
        }
    }
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("knn") {
            return Ok(EvalMethod::Knn);
        }
        Ok(match s.parse::<Method>()? {
            Method::Lsr => EvalMethod::Lsr,
            Method::Ilsr => EvalMethod::Ilsr,
            Method::Rbm => EvalMethod::Rbm,
            Method::Irbm => EvalMethod::Irbm,
        })
    }
}

/// A single value or a list of values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    One(f64),
    Many(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::One(v) => vec![*v],
            Sweep::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub format: DatasetFormat,
    /// Entry budget; defaults to all entries for MovieLens and
    /// [`DEFAULT_MAX_ENTRIES`] otherwise.
    #[serde(default)]
    pub max_entries: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    #[default]
    Polynomial,
    Ideal,
}

/// Cross-validation experiment description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default = "default_methods")]
    pub methods: Vec<EvalMethod>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_alpha")]
    pub alpha: Sweep,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_sigma_r")]
    pub sigma_r: Sweep,
    #[serde(default = "default_true")]
    pub bilateral: bool,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default)]
    pub filter: FilterKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub knn_scope: KnnScope,
    #[serde(default)]
    pub centering: Centering,
    #[serde(default)]
    pub cosine: CosineMode,
}

fn default_methods() -> Vec<EvalMethod> {
    vec![EvalMethod::Lsr, EvalMethod::Ilsr, EvalMethod::Rbm, EvalMethod::Irbm, EvalMethod::Knn]
}
fn default_k() -> usize {
    30
}
fn default_alpha() -> Sweep {
    Sweep::One(0.05)
}
fn default_sigma_r() -> Sweep {
    Sweep::One(1.0)
}
fn default_true() -> bool {
    true
}
fn default_degree() -> usize {
    DEFAULT_DEGREE
}
fn default_folds() -> usize {
    5
}
fn default_max_iters() -> usize {
    StoppingRule::default().max_iters
}
fn default_tol() -> f64 {
    StoppingRule::default().tol
}

impl ExperimentConfig {
    /// Config with every field at its default.
    pub fn new(path: impl Into<PathBuf>, format: DatasetFormat) -> Self {
        Self {
            dataset: DatasetConfig { path: path.into(), format, max_entries: None },
            methods: default_methods(),
            k: default_k(),
            alpha: default_alpha(),
            beta: None,
            sigma_r: default_sigma_r(),
            bilateral: true,
            degree: default_degree(),
            filter: FilterKind::default(),
            seed: 0,
            folds: default_folds(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            knn_scope: KnnScope::default(),
            centering: Centering::default(),
            cosine: CosineMode::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.dataset.path = resolve_dataset_path(&cfg.dataset.path, path.parent());
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.degree == 0 {
            return bad("degree must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be non-negative, got {}", self.tol));
        }
        let alphas = self.alpha.values();
        if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return bad(format!("alpha values must be positive, got {alphas:?}"));
        }
        let sigmas = self.sigma_r.values();
        if sigmas.is_empty() || sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad(format!("sigma_r values must be positive, got {sigmas:?}"));
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta.is_finite()) {
                return bad(format!("beta must be positive, got {beta}"));
            }
        }
        Ok(())
    }

    /// Lowercase hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn stop(&self) -> StoppingRule {
        StoppingRule::new(self.max_iters, self.tol)
    }

    pub fn filter_mode(&self) -> FilterMode {
        match self.filter {
            FilterKind::Polynomial => FilterMode::Polynomial(self.degree),
            FilterKind::Ideal => FilterMode::Ideal,
        }
    }

    /// Every evaluated (method, σ_r, α) combination in report order.
    pub fn variants(&self) -> Vec<Variant> {
        let sigmas: Vec<Option<f64>> =
            if self.bilateral { self.sigma_r.values().into_iter().map(Some).collect() } else { vec![None] };
        let mut out = Vec::new();
        for &method in &self.methods {
            if out.iter().any(|v: &Variant| v.method == method) {
                continue;
            }
            match method.graph_method() {
                None => out.push(Variant { method, sigma_r: None, alpha: None }),
                Some(m) => {
                    for &sigma_r in &sigmas {
                        if m.is_regularized() {
                            for alpha in self.alpha.values() {
                                out.push(Variant { method, sigma_r, alpha: Some(alpha) });
                            }
                        } else {
                            out.push(Variant { method, sigma_r, alpha: None });
                        }
                    }
                }
            }
        }
        out
    }

    fn max_entries(&self) -> Option<usize> {
        match (self.dataset.max_entries, self.dataset.format) {
            (Some(m), _) => Some(m),
            (None, DatasetFormat::Movielens) => None,
            (None, _) => Some(DEFAULT_MAX_ENTRIES),
        }
    }
}

/// Tries `path` as given, then relative to `base`, then under
/// `$GRAPHTERP_DATA_DIR`.
pub fn resolve_dataset_path(path: &Path, base: Option<&Path>) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    let mut candidates = Vec::new();
    if let Some(base) = base {
        candidates.push(base.join(path));
    }
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        candidates.push(Path::new(&dir).join(path));
    }
    candidates.into_iter().find(|p| p.exists()).unwrap_or_else(|| path.to_path_buf())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub method: EvalMethod,
    pub sigma_r: Option<f64>,
    pub alpha: Option<f64>,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method.name())?;
        let mut params = Vec::new();
        if let Some(s) = self.sigma_r {
            params.push(format!("sigma_r={s}"));
        }
        if let Some(a) = self.alpha {
            params.push(format!("alpha={a}"));
        }
        if !params.is_empty() {
            write!(f, "[{}]", params.join(";"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub name: String,
    pub variant: Variant,
    pub fold_nrmse: Vec<f64>,
    pub mean_nrmse: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub path: PathBuf,
    pub entries: usize,
    pub users: usize,
    pub items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub test_entries: usize,
    /// Rating entries the fold's item graph was built from.
    pub graph_entries: usize,
    pub graph_edges: usize,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub dataset: Option<DatasetSummary>,
    pub folds: Vec<FoldSummary>,
    pub variants: Vec<VariantResult>,
}

impl EvalReport {
    /// Lowest-error variant of `method`.
    pub fn best(&self, method: EvalMethod) -> Option<&VariantResult> {
        self.variants
            .iter()
            .filter(|v| v.variant.method == method)
            .min_by(|a, b| a.mean_nrmse.total_cmp(&b.mean_nrmse))
    }

    /// User solves that hit the iteration cap, over all variants and folds.
    pub fn not_converged(&self) -> usize {
        self.variants.iter().map(|v| v.diagnostics.not_converged).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table with one row per variant.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "config {}", &self.config_hash[..12.min(self.config_hash.len())]);
        if let Some(d) = &self.dataset {
            let _ = writeln!(out, "dataset {} ({} entries, {} users, {} items)", d.path.display(), d.entries, d.users, d.items);
        }
        let width = self.variants.iter().map(|v| v.name.len()).max().unwrap_or(6).max(6);
        let _ = write!(out, "{:<width$}", "method");
        for f in 0..self.folds.len() {
            let _ = write!(out, "  {:>8}", format!("fold{}", f + 1));
        }
        let _ = writeln!(out, "  {:>8}  {:>8}", "mean", "nonconv");
        for v in &self.variants {
            let _ = write!(out, "{:<width$}", v.name);
            for e in &v.fold_nrmse {
                let _ = write!(out, "  {e:>8.4}");
            }
            let _ = writeln!(out, "  {:>8.4}  {:>8}", v.mean_nrmse, v.diagnostics.not_converged);
        }
        out
    }
}

/// Report plus the per-prediction data it was computed from.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    /// Test entries of every fold, in entry order.
    pub test_entries: Vec<Vec<Rating>>,
    /// `predictions[variant][fold][j]` predicts `test_entries[fold][j]`.
    pub predictions: Vec<Vec<Vec<f64>>>,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
}

impl ExperimentOutput {
    /// CSV with header `fold,method,user,item,truth,prediction`, ordered by
    /// fold, variant and entry. Values use the shortest round-trip form.
    pub fn write_predictions_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "fold,method,user,item,truth,prediction")?;
        for (f, tests) in self.test_entries.iter().enumerate() {
            for (v, variant) in self.report.variants.iter().enumerate() {
                for (e, p) in tests.iter().zip(&self.predictions[v][f]) {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        f + 1,
                        variant.name,
                        self.user_ids[e.user],
                        self.item_ids[e.item],
                        e.value,
                        p
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Loads the dataset named by `cfg` and runs the cross-validation.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.methods.is_empty() {
        return Ok(ExperimentOutput {
            report: EvalReport { config: cfg.clone(), config_hash: cfg.hash(), dataset: None, folds: vec![], variants: vec![] },
            test_entries: vec![],
            predictions: vec![],
            user_ids: vec![],
            item_ids: vec![],
        });
    }
    let path = resolve_dataset_path(&cfg.dataset.path, None);
    let data = load_ratings(&path, cfg.dataset.format)?;
    let data = match cfg.max_entries() {
        Some(max) => subsample(&data, max, cfg.seed),
        None => data,
    };
    let mut out = run_on(cfg, &data)?;
    if let Some(d) = out.report.dataset.as_mut() {
        d.path = path;
    }
    Ok(out)
}

/// Cross-validation on an already loaded rating matrix.
pub fn run_on(cfg: &ExperimentConfig, data: &RatingMatrix) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let variants = cfg.variants();
    let split = kfold_split(data, cfg.folds, cfg.seed)?;
    let mut fold_summaries = Vec::with_capacity(cfg.folds);
    let mut test_entries = Vec::with_capacity(cfg.folds);
    let mut predictions = vec![Vec::with_capacity(cfg.folds); variants.len()];
    let mut diagnostics = vec![Diagnostics::default(); variants.len()];

    for f in 0..cfg.folds {
        let started = Instant::now();
        let (train, test) = split.split(data, f);
        let g0 = cosine_item_graph(&train, cfg.cosine)?;
        let (fold_preds, fold_diag) = evaluate_fold(cfg, &variants, &train, &g0, &test)
            .map_err(|(v, e)| Error::Experiment { fold: f + 1, method: variants[v].to_string(), source: Box::new(e) })?;
        for (v, p) in fold_preds.into_iter().enumerate() {
            predictions[v].push(p);
            diagnostics[v].merge(&fold_diag[v]);
        }
        let runtime_secs = started.elapsed().as_secs_f64();
        log::info!("fold {}/{}: {} test entries in {:.1}s", f + 1, cfg.folds, test.len(), runtime_secs);
        fold_summaries.push(FoldSummary {
            test_entries: test.len(),
            graph_entries: train.len(),
            graph_edges: g0.num_edges(),
            runtime_secs,
        });
        test_entries.push(test);
    }

    let scale = data.scale();
    let mut results = Vec::with_capacity(variants.len());
    for (v, variant) in variants.iter().enumerate() {
        let mut fold_nrmse = Vec::with_capacity(cfg.folds);
        for f in 0..cfg.folds {
            let truth: Vec<f64> = test_entries[f].iter().map(|e| e.value).collect();
            fold_nrmse.push(normalized_rmse(&predictions[v][f], &truth, scale)?);
        }
        let mean_nrmse = fold_nrmse.iter().sum::<f64>() / fold_nrmse.len() as f64;
        results.push(VariantResult {
            name: variant.to_string(),
            variant: *variant,
            fold_nrmse,
            mean_nrmse,
            diagnostics: diagnostics[v],
        });
    }

    let user_ids = (0..data.num_users()).map(|u| data.user_id(u).to_string()).collect();
    let item_ids = (0..data.num_items()).map(|i| data.item_id(i).to_string()).collect();
    Ok(ExperimentOutput {
        report: EvalReport {
            config: cfg.clone(),
            config_hash: cfg.hash(),
            dataset: Some(DatasetSummary {
                path: cfg.dataset.path.clone(),
                entries: data.len(),
                users: data.num_users(),
                items: data.num_items(),
            }),
            folds: fold_summaries,
            variants: results,
        },
        test_entries,
        predictions,
        user_ids,
        item_ids,
    })
}

type FoldResult = std::result::Result<(Vec<Vec<f64>>, Vec<Diagnostics>), (usize, Error)>;

/// Predictions of every variant for one fold's test entries.
fn evaluate_fold(
    cfg: &ExperimentConfig,
    variants: &[Variant],
    train: &RatingMatrix,
    g0: &Graph,
    test: &[Rating],
) -> FoldResult {
    let by_user = train.by_user();
    let item_means = train.item_means();
    let mut requests: Vec<Vec<usize>> = vec![Vec::new(); train.num_users()];
    for (j, e) in test.iter().enumerate() {
        requests[e.user].push(j);
    }
    let active: Vec<usize> = (0..requests.len()).filter(|&u| !requests[u].is_empty()).collect();

    let per_user: Vec<Vec<UserPrediction>> = active
        .par_iter()
        .map(|&u| {
            let items: Vec<usize> = requests[u].iter().map(|&j| test[j].item).collect();
            evaluate_user(cfg, variants, g0, &by_user[u], u, &items, &item_means, train)
        })
        .collect::<std::result::Result<_, _>>()?;

    let mut preds = vec![vec![f64::NAN; test.len()]; variants.len()];
    let mut diag = vec![Diagnostics::default(); variants.len()];
    for (&u, results) in active.iter().zip(&per_user) {
        let cold = by_user[u].is_empty();
        for (v, p) in results.iter().enumerate() {
            for (&j, &value) in requests[u].iter().zip(&p.predictions) {
                preds[v][j] = value;
            }
            diag[v].record(p);
            diag[v].cold_start_users += usize::from(cold);
        }
    }
    Ok((preds, diag))
}

#[allow(clippy::too_many_arguments)]
fn evaluate_user(
    cfg: &ExperimentConfig,
    variants: &[Variant],
    g0: &Graph,
    known: &[(usize, f64)],
    user: usize,
    items: &[usize],
    item_means: &[Option<f64>],
    train: &RatingMatrix,
) -> std::result::Result<Vec<UserPrediction>, (usize, Error)> {
    let scale = train.scale();
    let plain = |predictions: Vec<f64>| UserPrediction { predictions, isolated: 0, fallback: false, iterations: 0, status: None };
    if known.is_empty() {
        let p: Vec<f64> = items.iter().map(|&i| cold_start_prediction(item_means, scale, i)).collect();
        return Ok(variants.iter().map(|_| plain(p.clone())).collect());
    }

    let mut out: Vec<Option<UserPrediction>> = vec![None; variants.len()];
    for (v, variant) in variants.iter().enumerate() {
        if variant.method == EvalMethod::Knn {
            let mean = known.iter().map(|&(_, r)| r).sum::<f64>() / known.len() as f64;
            let p = items.iter().map(|&i| scale.clip(knn_predict(g0, known, i, cfg.k).unwrap_or(mean))).collect();
            out[v] = Some(plain(p));
        }
    }

    let graph_variants: Vec<usize> = (0..variants.len()).filter(|&v| out[v].is_none()).collect();
    if !graph_variants.is_empty() {
        let first = graph_variants[0];
        let base = UserContext::sparsified(g0, user, known, items, cfg.k, cfg.knn_scope).map_err(|e| (first, e))?;
        // one prepared problem per bilateral setting, shared by all methods
        let mut sigmas: Vec<Option<f64>> = Vec::new();
        for &v in &graph_variants {
            if !sigmas.contains(&variants[v].sigma_r) {
                sigmas.push(variants[v].sigma_r);
            }
        }
        for sigma in sigmas {
            let members: Vec<usize> = graph_variants.iter().copied().filter(|&v| variants[v].sigma_r == sigma).collect();
            let bilateral = match sigma {
                Some(sigma_r) => BilateralConfig { sigma_r, enabled: true },
                None => BilateralConfig::disabled(),
            };
            let ctx = base.adjusted(&bilateral).map_err(|e| (members[0], e))?;
            let mut problem = UserProblem::new(&ctx, cfg.centering, scale).map_err(|e| (members[0], e))?;
            for v in members {
                let method = variants[v].method.graph_method().expect("graph variant");
                let params = SolveParams {
                    alpha: variants[v].alpha.unwrap_or(default_alpha_value()),
                    beta: cfg.beta,
                    filter_mode: cfg.filter_mode(),
                    stop: cfg.stop(),
                };
                out[v] = Some(problem.solve(method, &params).map_err(|e| (v, e))?);
            }
        }
    }
    Ok(out.into_iter().map(|p| p.expect("every variant evaluated")).collect())
}

fn default_alpha_value() -> f64 {
    match default_alpha() {
        Sweep::One(a) => a,
        Sweep::Many(v) => v[0],
    }
}
