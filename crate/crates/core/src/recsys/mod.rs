//! Collaborative filtering on an item-item similarity graph: every user's
//! ratings are a partially observed signal on the items they rated, and
//! missing ratings are filled in by graph interpolation.

mod bilateral;
mod predict;
mod ratings;
mod similarity;

pub use bilateral::{bilateral_adjust, BilateralConfig};
pub use predict::{
    cold_start_prediction, predict_pairs, predict_user, Centering, Diagnostics, KnnScope, Method,
    PipelineConfig, SolveParams, UserContext, UserPrediction, UserProblem,
};
pub use ratings::{load_ratings, parse_ratings, DatasetFormat, Rating, RatingMatrix, RatingScale};
pub use similarity::{cosine_item_graph, CosineMode};
