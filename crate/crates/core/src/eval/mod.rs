//! Cross-validation harness for the recommendation pipeline: fold
//! assignment, normalized RMSE, a KNN baseline and experiment reports.

mod experiment;
mod folds;
mod knn;
mod metrics;

pub use experiment::{
    resolve_dataset_path, run_experiment, run_on, DatasetConfig, DatasetSummary, EvalMethod, EvalReport,
    ExperimentConfig, ExperimentOutput, FilterKind, FoldSummary, Sweep, Variant, VariantResult, DATA_DIR_ENV,
    DEFAULT_MAX_ENTRIES,
};
pub use folds::{kfold_split, subsample, FoldSplit};
pub use knn::{knn_baseline_predict, knn_predict};
pub use metrics::normalized_rmse;
