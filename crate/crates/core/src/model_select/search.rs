use std::path::Path;
use std::time::Instant;

use log::warn;
use ndarray::Axis;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimator::{Estimator, MlpEstimator, Predictor, Scaled, SvmEstimator};
use super::kfold::{fold_complement, stratified_kfold};
use crate::error::{Error, Result};
use crate::mlp::{Activation, LearningRateMode, MlpConfig, Solver};
use crate::preprocess::{format_float, LabeledDataset, ScalerKind};
use crate::svm::{KernelKind, SmoOptions, SvmParams};

/// Fraction of `pred` equal to `truth`.
pub(crate) fn accuracy(truth: &[usize], pred: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    truth.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Held-out accuracy of each of `k` stratified folds, fitting `est` on the
/// remaining folds each time.
pub fn cross_val_score<E: Estimator>(est: &E, ds: &LabeledDataset, k: usize, seed: u64) -> Result<Vec<f64>> {
    let folds = stratified_kfold(&ds.y, ds.n_classes(), k, seed)?;
    (0..k)
        .map(|f| {
            let train = fold_complement(&folds, f);
            let xt = ds.x.select(Axis(0), &train);
            let yt: Vec<usize> = train.iter().map(|&i| ds.y[i]).collect();
            let model = est.fit(xt.view(), &yt, ds.n_classes())?;
            let xv = ds.x.select(Axis(0), &folds[f]);
            let yv: Vec<usize> = folds[f].iter().map(|&i| ds.y[i]).collect();
            Ok(accuracy(&yv, &model.predict(xv.view())?))
        })
        .collect()
}

/// SVM search ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSpace {
    pub c: (f64, f64),
    pub gamma: (f64, f64),
    pub kernels: Vec<KernelKind>,
    pub degree: u32,
    pub coef0: f64,
}

impl Default for SvmSpace {
    fn default() -> Self {
        SvmSpace {
            c: (2.0, 50.0),
            gamma: (0.01, 1.0),
            kernels: vec![KernelKind::Rbf, KernelKind::Poly, KernelKind::Linear],
            degree: 3,
            coef0: 0.0,
        }
    }
}

/// MLP choice lists; fields not searched come from `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpace {
    pub hidden_layers: Vec<Vec<usize>>,
    pub activations: Vec<Activation>,
    pub solvers: Vec<Solver>,
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub learning_rate_modes: Vec<LearningRateMode>,
    pub base: MlpConfig,
}

impl Default for MlpSpace {
    fn default() -> Self {
        MlpSpace {
            hidden_layers: vec![vec![8], vec![180], vec![300], vec![100, 50], vec![10, 10, 10]],
            activations: vec![Activation::Tanh, Activation::Relu, Activation::Logistic],
            solvers: vec![Solver::Sgd, Solver::Adam],
            alphas: vec![1e-4, 1e-3, 1e-2],
            epsilons: vec![1e-8, 0.1],
            learning_rate_modes: vec![LearningRateMode::Adaptive, LearningRateMode::Constant],
            base: MlpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ParamSpace {
    Svm(SvmSpace),
    Mlp(MlpSpace),
}

/// One drawn parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Candidate {
    Svm(SvmParams),
    Mlp(MlpConfig),
}

impl Candidate {
    /// Column names and values for the searched dimensions.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        match self {
            Candidate::Svm(p) => vec![
                ("kernel", p.kernel.to_string()),
                ("C", format_float(p.c)),
                ("gamma", p.gamma.map(format_float).unwrap_or_else(|| "scale".into())),
            ],
            Candidate::Mlp(c) => vec![
                (
                    "hidden_layers",
                    c.hidden_layers.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("x"),
                ),
                ("activation", c.activation.to_string()),
                ("solver", format!("{:?}", c.solver).to_lowercase()),
                ("alpha", format_float(c.alpha)),
                ("epsilon", format_float(c.epsilon)),
                ("learning_rate", format!("{:?}", c.learning_rate_mode).to_lowercase()),
            ],
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(format!("{name} range ({lo}, {hi}) must have low < high")));
    }
    Ok(())
}

fn check_list<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(format!("{name} choice list is empty")));
    }
    Ok(())
}

impl ParamSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            ParamSpace::Svm(s) => {
                check_range("C", s.c)?;
                check_range("gamma", s.gamma)?;
                if s.c.0 <= 0.0 || s.gamma.0 <= 0.0 {
                    return Err(Error::invalid("C and gamma ranges must be positive"));
                }
                check_list("kernel", &s.kernels)
            }
            ParamSpace::Mlp(m) => {
                check_list("hidden_layers", &m.hidden_layers)?;
                check_list("activation", &m.activations)?;
                check_list("solver", &m.solvers)?;
                check_list("alpha", &m.alphas)?;
                check_list("epsilon", &m.epsilons)?;
                check_list("learning_rate", &m.learning_rate_modes)?;
                m.base.validate()
            }
        }
    }

    /// Draw one candidate.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Candidate {
        match self {
            ParamSpace::Svm(s) => {
                let c = rng.random_range(s.c.0..s.c.1);
                let gamma = rng.random_range(s.gamma.0..s.gamma.1);
                let kernel = *s.kernels.choose(rng).expect("validated non-empty");
                Candidate::Svm(SvmParams {
                    c,
                    kernel,
                    gamma: Some(gamma),
                    degree: s.degree,
                    coef0: s.coef0,
                })
            }
            ParamSpace::Mlp(m) => Candidate::Mlp(MlpConfig {
                hidden_layers: m.hidden_layers.choose(rng).expect("validated").clone(),
                activation: *m.activations.choose(rng).expect("validated"),
                solver: *m.solvers.choose(rng).expect("validated"),
                alpha: *m.alphas.choose(rng).expect("validated"),
                epsilon: *m.epsilons.choose(rng).expect("validated"),
                learning_rate_mode: *m.learning_rate_modes.choose(rng).expect("validated"),
                ..m.base.clone()
            }),
        }
    }
}

/// Random stream for candidate `index`: the seed picks the key and the
/// index picks the stream, so candidate draws do not depend on `n_iter`.
pub fn candidate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub n_iter: usize,
    pub k: usize,
    pub seed: u64,
    /// Scaler refit inside every fold, or `None` for no scaling.
    pub scaler: Option<ScalerKind>,
    pub smo: SmoOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            n_iter: 10,
            k: 3,
            seed: 0,
            scaler: Some(ScalerKind::Standard),
            smo: SmoOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub params: Candidate,
    pub fold_scores: Vec<f64>,
    /// Mean fold accuracy, `−∞` for a failed candidate.
    pub mean: f64,
    /// Population standard deviation of the fold scores.
    pub std: f64,
    pub fit_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub candidates: Vec<CandidateResult>,
    pub best_index: usize,
}

impl SearchResult {
    pub fn best(&self) -> &CandidateResult {
        &self.candidates[self.best_index]
    }

    /// One row per candidate in sampling order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let k = self.candidates.iter().map(|c| c.fold_scores.len()).max().unwrap_or(0);
        let mut header: Vec<String> = vec!["index".into()];
        if let Some(first) = self.candidates.first() {
            header.extend(first.params.describe().into_iter().map(|(n, _)| n.to_string()));
        }
        header.extend((1..=k).map(|f| format!("fold_{f}")));
        header.extend(["mean", "std", "fit_seconds", "error"].map(String::from));
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (i, c) in self.candidates.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(c.params.describe().into_iter().map(|(_, v)| v));
            row.extend((0..k).map(|f| c.fold_scores.get(f).map(|&s| format_float(s)).unwrap_or_default()));
            row.push(format_float(c.mean));
            row.push(format_float(c.std));
            row.push(format_float(c.fit_seconds));
            row.push(c.error.clone().unwrap_or_default());
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `(C, gamma, mean)` per SVM candidate, for surface plots. MLP searches
    /// have no continuous surface and write only the header.
    pub fn write_surface_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["C", "gamma", "kernel", "mean_score"])
            .map_err(|e| Error::csv(path, e))?;
        for c in &self.candidates {
            if let Candidate::Svm(p) = &c.params {
                let gamma = p.gamma.map(format_float).unwrap_or_else(|| "scale".into());
                w.write_record([format_float(p.c), gamma, p.kernel.to_string(), format_float(c.mean)])
                    .map_err(|e| Error::csv(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn population_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

fn score_candidate(cand: &Candidate, ds: &LabeledDataset, opts: &SearchOptions) -> Result<Vec<f64>> {
    match cand {
        Candidate::Svm(p) => {
            let est = Scaled {
                scaler: opts.scaler,
                inner: SvmEstimator {
                    params: *p,
                    opts: opts.smo,
                },
            };
            cross_val_score(&est, ds, opts.k, opts.seed)
        }
        Candidate::Mlp(c) => {
            let est = Scaled {
                scaler: opts.scaler,
                inner: MlpEstimator { config: c.clone() },
            };
            cross_val_score(&est, ds, opts.k, opts.seed)
        }
    }
}

/// Score `n_iter` random candidates with stratified k-fold CV. Every
/// candidate uses the same folds. A failing candidate is recorded with mean
/// `−∞` and its error message.
pub fn randomized_search(space: &ParamSpace, ds: &LabeledDataset, opts: &SearchOptions) -> Result<SearchResult> {
    if opts.n_iter == 0 {
        return Err(Error::invalid("n_iter must be ≥ 1"));
    }
    space.validate()?;
    // Fail fast on data that cannot be folded at all.
    stratified_kfold(&ds.y, ds.n_classes(), opts.k, opts.seed)?;

    let candidates: Vec<CandidateResult> = (0..opts.n_iter)
        .into_par_iter()
        .map(|i| {
            let params = space.sample(&mut candidate_rng(opts.seed, i));
            let start = Instant::now();
            let outcome = score_candidate(&params, ds, opts);
            let fit_seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(scores) => CandidateResult {
                    mean: scores.iter().sum::<f64>() / scores.len() as f64,
                    std: population_std(&scores),
                    fold_scores: scores,
                    params,
                    fit_seconds,
                    error: None,
                },
                Err(e) => {
                    warn!("search candidate {i} failed: {e}");
                    CandidateResult {
                        params,
                        fold_scores: Vec::new(),
                        mean: f64::NEG_INFINITY,
                        std: 0.0,
                        fit_seconds,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();

    let mut best_index = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.mean > candidates[best_index].mean {
            best_index = i;
        }
    }
    Ok(SearchResult {
        candidates,
        best_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_select::fixtures::{toy_dataset, Memorizer};
    use ndarray::ArrayView2;

    struct Constant(usize);
    impl Predictor for Constant {
        fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
            Ok(vec![self.0; x.nrows()])
        }
    }
    struct ConstantEstimator;
    impl Estimator for ConstantEstimator {
        type Model = Constant;
        fn fit(&self, _: ArrayView2<f64>, _: &[usize], _: usize) -> Result<Constant> {
            Ok(Constant(0))
        }
    }

    #[test]
    fn memorizer_on_duplicated_data_scores_one() {
        let base = toy_dataset(3, 3);
        let ds = base.concat(&base).unwrap().concat(&base).unwrap();
        let scores = cross_val_score(&Memorizer, &ds, 3, 4).unwrap();
        assert_eq!(scores, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn constant_predictor_scores_one_third() {
        let ds = toy_dataset(9, 3);
        let scores = cross_val_score(&ConstantEstimator, &ds, 3, 0).unwrap();
        assert!(scores.iter().all(|&s| (s - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn svm_candidates_stay_in_range_and_replay() {
        let ds = toy_dataset(6, 3);
        let space = ParamSpace::Svm(SvmSpace::default());
        let opts = SearchOptions {
            n_iter: 6,
            ..Default::default()
        };
        let r = randomized_search(&space, &ds, &opts).unwrap();
        for c in &r.candidates {
            let Candidate::Svm(p) = &c.params else { panic!() };
            assert!((2.0..50.0).contains(&p.c));
            assert!((0.01..1.0).contains(&p.gamma.unwrap()));
            assert!(c.fold_scores.iter().all(|s| (0.0..=1.0).contains(s)));
            let mean = c.fold_scores.iter().sum::<f64>() / 3.0;
            assert_eq!(mean, c.mean);
        }
        let again = randomized_search(&space, &ds, &opts).unwrap();
        let strip = |r: &SearchResult| -> Vec<(Candidate, Vec<f64>)> {
            r.candidates.iter().map(|c| (c.params.clone(), c.fold_scores.clone())).collect()
        };
        assert_eq!(strip(&r), strip(&again));
        assert_eq!(r.best_index, again.best_index);
        assert!(r.candidates.iter().all(|c| c.mean <= r.best().mean));
    }

    #[test]
    fn single_iteration_picks_index_zero() {
        let ds = toy_dataset(6, 2);
        let opts = SearchOptions {
            n_iter: 1,
            ..Default::default()
        };
        let r = randomized_search(&ParamSpace::Svm(SvmSpace::default()), &ds, &opts).unwrap();
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn candidate_draws_are_prefix_stable() {
        let space = ParamSpace::Mlp(MlpSpace::default());
        let short: Vec<Candidate> = (0..5).map(|i| space.sample(&mut candidate_rng(9, i))).collect();
        let long: Vec<Candidate> = (0..6).map(|i| space.sample(&mut candidate_rng(9, i))).collect();
        assert_eq!(short[..], long[..5]);
        let other: Vec<Candidate> = (0..5).map(|i| space.sample(&mut candidate_rng(10, i))).collect();
        assert_ne!(short, other);
    }

    #[test]
    fn failed_candidate_is_recorded_not_fatal() {
        let ds = toy_dataset(6, 2);
        let mut space = MlpSpace::default();
        // A base with early stopping and a tiny validation set still works;
        // an absurd learning rate makes training diverge.
        space.base.initial_lr = 1e300;
        space.base.max_epochs = 3;
        space.solvers = vec![Solver::Sgd];
        let opts = SearchOptions {
            n_iter: 2,
            scaler: None,
            ..Default::default()
        };
        let r = randomized_search(&ParamSpace::Mlp(space), &ds, &opts).unwrap();
        assert!(r.candidates.iter().any(|c| c.error.is_some() && c.mean == f64::NEG_INFINITY));
    }

    #[test]
    fn empty_space_is_rejected() {
        let space = ParamSpace::Svm(SvmSpace {
            kernels: vec![],
            ..Default::default()
        });
        assert!(space.validate().is_err());
        let space = ParamSpace::Svm(SvmSpace {
            c: (5.0, 5.0),
            ..Default::default()
        });
        assert!(space.validate().is_err());
    }

    #[test]
    fn csv_outputs_have_one_row_per_candidate() {
        let ds = toy_dataset(6, 2);
        let opts = SearchOptions {
            n_iter: 3,
            ..Default::default()
        };
        let r = randomized_search(&ParamSpace::Svm(SvmSpace::default()), &ds, &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write_csv(&dir.path().join("search.csv")).unwrap();
        r.write_surface_csv(&dir.path().join("surface.csv")).unwrap();
        let s = std::fs::read_to_string(dir.path().join("search.csv")).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert!(s.starts_with("index,kernel,C,gamma,fold_1,fold_2,fold_3,mean,std,fit_seconds,error"));
        let s = std::fs::read_to_string(dir.path().join("surface.csv")).unwrap();
        assert_eq!(s.lines().count(), 4);
    }
}
