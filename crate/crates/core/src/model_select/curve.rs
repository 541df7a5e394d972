use std::path::Path;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use super::estimator::{Estimator, Predictor};
use super::kfold::{fold_complement, stratified_kfold};
use super::search::accuracy;
use crate::error::{Error, Result};
use crate::preprocess::{format_float, stratified_subsample, LabeledDataset};

/// Mean scores over the CV folds at one training-set fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningPoint {
    pub fraction: f64,
    /// Mean training-subset size across folds.
    pub n_train: f64,
    pub train_score: f64,
    pub cv_score: f64,
}

/// Smallest per-class subset a learning-curve fit sees, so estimators that
/// hold out a stratified validation split still can.
pub const MIN_ROWS_PER_CLASS: usize = 2;

/// `0.1, 0.2, …, 1.0`.
pub fn default_fractions() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// For each fold and fraction, fit on a stratified subset of the fold's
/// training rows holding `ceil(fraction·count)` rows per class (at least
/// [`MIN_ROWS_PER_CLASS`] where the class has them), then score
/// that subset and the held-out fold.
pub fn learning_curve<E: Estimator>(
    est: &E,
    ds: &LabeledDataset,
    fractions: &[f64],
    k: usize,
    seed: u64,
) -> Result<Vec<LearningPoint>> {
    if let Some(&bad) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::invalid(format!("learning-curve fraction {bad} must lie in (0, 1]")));
    }
    let folds = stratified_kfold(&ds.y, ds.n_classes(), k, seed)?;
    fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let mut train_sum = 0.0;
            let mut cv_sum = 0.0;
            let mut n_sum = 0.0;
            for (f, held_out) in folds.iter().enumerate() {
                let pool = fold_complement(&folds, f);
                let sub_seed = seed.wrapping_add((fi * k + f) as u64);
                let idx = stratified_subsample(&pool, &ds.y, ds.n_classes(), fraction, MIN_ROWS_PER_CLASS, sub_seed);
                let xt = ds.x.select(Axis(0), &idx);
                let yt: Vec<usize> = idx.iter().map(|&i| ds.y[i]).collect();
                let model = est.fit(xt.view(), &yt, ds.n_classes())?;
                train_sum += accuracy(&yt, &model.predict(xt.view())?);
                let xv = ds.x.select(Axis(0), held_out);
                let yv: Vec<usize> = held_out.iter().map(|&i| ds.y[i]).collect();
                cv_sum += accuracy(&yv, &model.predict(xv.view())?);
                n_sum += idx.len() as f64;
            }
            let kf = k as f64;
            Ok(LearningPoint {
                fraction,
                n_train: n_sum / kf,
                train_score: train_sum / kf,
                cv_score: cv_sum / kf,
            })
        })
        .collect()
}

pub fn write_learning_curve_csv(path: &Path, points: &[LearningPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["fraction", "n_train", "train_score", "cv_score"])
        .map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([
            format_float(p.fraction),
            format_float(p.n_train),
            format_float(p.train_score),
            format_float(p.cv_score),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
