//! Stratified k-fold cross-validation, randomized hyperparameter search and
//! learning curves.

mod curve;
mod estimator;
#[cfg(test)]
pub(crate) mod fixtures;
mod kfold;
mod search;

pub use curve::{
    default_fractions, learning_curve, write_learning_curve_csv, LearningPoint, MIN_ROWS_PER_CLASS,
};
pub use estimator::{Estimator, MlpEstimator, Predictor, Scaled, ScaledModel, SvmEstimator};
pub use kfold::{fold_complement, stratified_kfold};
pub use search::{
    candidate_rng, cross_val_score, randomized_search, Candidate, CandidateResult, MlpSpace,
    ParamSpace, SearchOptions, SearchResult, SvmSpace,
};

pub(crate) use search::population_std;
