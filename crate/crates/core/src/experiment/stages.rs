use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use ndarray::{s, ArrayView2};
use serde::{Deserialize, Serialize};

use super::config::{ChannelChoice, ExperimentConfig, ScalerChoice};
use super::extract::base_path;
use super::model_io::{save_model, ModelKind, SavedModel, TrainedModel};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, render_report, ReportBundle, ReportSummary};
use crate::features::FeatureLayout;
use crate::ingest::VocalChannel;
use crate::mlp::{self, MlpConfig};
use crate::model_select::{
    cross_val_score, learning_curve, population_std, randomized_search, Candidate, Estimator,
    MlpSpace, ParamSpace, Scaled, SearchOptions, SearchResult, SvmSpace,
};
use crate::preprocess::{
    fit_scaler, read_feature_csv, smote, stratified_split, LabeledDataset, ScalerKind, ScalerParams,
};
use crate::svm::{SmoOptions, SvmParams};

/// Version written to every run manifest.
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// The four steps of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ScalingComparison,
    Optimized,
    AugmentedSmote,
    ChannelSplit,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::ScalingComparison,
        Stage::Optimized,
        Stage::AugmentedSmote,
        Stage::ChannelSplit,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Result<Stage> {
        Stage::ALL
            .get((n as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::invalid(format!("stage {n} does not exist (1 to 4)")))
    }

    fn dir(self) -> String {
        format!("stage{}", self.number())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}", self.number())
    }
}

/// One trained and evaluated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub stage: u8,
    pub name: String,
    pub kind: ModelKind,
    pub scaler: ScalerChoice,
    /// Steps applied to the training rows, in order.
    pub preprocessing: Vec<String>,
    pub channel: ChannelChoice,
    pub params: Candidate,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub test_macro_auc: Option<f64>,
    pub test_macro_average_precision: Option<f64>,
    pub cv_scores: Vec<f64>,
    pub cv_mean: f64,
    pub cv_std: f64,
    pub converged: bool,
    pub n_train: usize,
    pub n_test: usize,
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
    pub fit_seconds: f64,
}

/// One randomized hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub stage: u8,
    pub name: String,
    pub kind: ModelKind,
    pub scaler: ScalerChoice,
    pub channel: ChannelChoice,
    pub n_iter: usize,
    pub k: usize,
    pub n_rows: usize,
    pub best_index: usize,
    pub best_params: Candidate,
    pub best_mean: f64,
    pub best_std: f64,
    pub failed_candidates: usize,
    pub artifacts: Vec<String>,
    pub search_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub stages: Vec<u8>,
    pub models: Vec<ModelRecord>,
    pub searches: Vec<SearchRecord>,
    pub warnings: Vec<String>,
    pub total_seconds: f64,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            config,
            stages: Vec::new(),
            models: Vec::new(),
            searches: Vec::new(),
            warnings: Vec::new(),
            total_seconds: 0.0,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// True when some model stopped at its iteration or epoch limit.
    pub fn has_convergence_warning(&self) -> bool {
        self.models.iter().any(|m| !m.converged)
    }

    /// The manifest as JSON with every `*_seconds` field removed, for
    /// comparing runs.
    pub fn without_timings(&self) -> serde_json::Value {
        fn strip(v: &mut serde_json::Value) {
            match v {
                serde_json::Value::Object(map) => {
                    map.retain(|k, _| !k.ends_with("_seconds"));
                    map.values_mut().for_each(strip);
                }
                serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
                _ => {}
            }
        }
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        strip(&mut v);
        v
    }
}

/// Feature tables a run reads: one row per original clip, and optionally
/// one row per augmented copy.
#[derive(Debug, Clone, PartialEq)]
pub struct StageInputs {
    pub features: LabeledDataset,
    pub augmented: Option<LabeledDataset>,
}

impl StageInputs {
    pub fn load(features: &Path, augmented: Option<&Path>) -> Result<Self> {
        let (x, meta) = read_feature_csv(features)?;
        let features = LabeledDataset::from_rows(x, meta)?;
        let augmented = match augmented {
            Some(p) => {
                let (x, meta) = read_feature_csv(p)?;
                Some(recode(&LabeledDataset::from_rows(x, meta)?, &features)?)
            }
            None => None,
        };
        Ok(StageInputs { features, augmented })
    }
}

/// `ds` relabelled with the classes of `like`.
fn recode(ds: &LabeledDataset, like: &LabeledDataset) -> Result<LabeledDataset> {
    let y = ds
        .y
        .iter()
        .map(|&c| like.codec.encode(ds.codec.decode(c)?))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(ds.x.clone(), y, ds.meta.clone(), like.codec.clone())
}

fn keep_channel(ds: &LabeledDataset, channel: Option<VocalChannel>) -> Result<LabeledDataset> {
    match channel {
        Some(c) => ds.filter(|m| m.channel == c),
        None => Ok(ds.clone()),
    }
}

/// Either candidate family behind one estimator.
struct CandidateEstimator {
    candidate: Candidate,
    smo: SmoOptions,
}

impl Estimator for CandidateEstimator {
    type Model = TrainedModel;

    fn fit(&self, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<TrainedModel> {
        match &self.candidate {
            Candidate::Svm(p) => Ok(TrainedModel::Svm(p.fit(x, y, n_classes, &self.smo)?)),
            Candidate::Mlp(c) => Ok(TrainedModel::Mlp(mlp::fit(c, x, y, n_classes)?.0)),
        }
    }
}

/// How feature scaling enters a model's training and validation.
///
/// Normally the scaler is refit on every training set (each CV fold and
/// the final training split). In paper-faithful mode it is fit once on all
/// rows of the stage and applied before splitting and CV.
struct Scaling {
    choice: ScalerChoice,
    fixed: Option<ScalerParams>,
}

impl Scaling {
    fn new(cfg: &ExperimentConfig, choice: ScalerChoice, all_rows: &LabeledDataset) -> Result<Self> {
        let fixed = match (cfg.paper_faithful, choice.kind()) {
            (true, Some(kind)) => Some(fit_scaler(all_rows.x.view(), kind)?),
            _ => None,
        };
        Ok(Scaling { choice, fixed })
    }

    /// Rows as seen by cross-validation and search.
    fn cv_view(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        match &self.fixed {
            Some(p) => ds.with_x(p.apply(ds.x.view())?),
            None => Ok(ds.clone()),
        }
    }

    /// Scaler refit inside each CV fold.
    fn fold_scaler(&self) -> Option<ScalerKind> {
        match self.fixed {
            Some(_) => None,
            None => self.choice.kind(),
        }
    }

    /// Scaler stored with the final model trained on `train`.
    fn final_scaler(&self, train: &LabeledDataset) -> Result<Option<ScalerParams>> {
        match (&self.fixed, self.choice.kind()) {
            (Some(p), _) => Ok(Some(p.clone())),
            (None, Some(kind)) => Ok(Some(fit_scaler(train.x.view(), kind)?)),
            (None, None) => Ok(None),
        }
    }

    fn describe(&self) -> String {
        match (&self.fixed, self.choice) {
            (_, ScalerChoice::None) => "scaler:none".into(),
            (Some(_), c) => format!("scaler:{c}(all rows)"),
            (None, c) => format!("scaler:{c}(training rows)"),
        }
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    out_dir: &'a Path,
    smo: SmoOptions,
    manifest: RunManifest,
}

/// One model to train, evaluate and record.
struct ModelJob<'a> {
    stage: Stage,
    name: String,
    candidate: Candidate,
    scaling: &'a Scaling,
    channel: ChannelChoice,
    preprocessing: Vec<String>,
    train: &'a LabeledDataset,
    test: &'a LabeledDataset,
    /// Fold scores already computed by a search, reused instead of a new CV.
    cv_scores: Option<Vec<f64>>,
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn evaluate_into(
    saved: &SavedModel,
    ds: &LabeledDataset,
    title: String,
    learning: Option<Vec<crate::model_select::LearningPoint>>,
    cv_scores: Option<Vec<f64>>,
    dir: &Path,
) -> Result<ReportSummary> {
    let (y_pred, scores) = saved.predict_with_scores(ds.x.view())?;
    let report = evaluate(&ReportBundle {
        title,
        class_names: saved.classes.clone(),
        y_true: ds.y.clone(),
        y_pred,
        scores,
        learning_curve: learning,
        cv_scores,
    })?;
    render_report(&report, dir)?;
    Ok(report.summary())
}

impl Runner<'_> {
    fn rel(&self, path: &Path) -> String {
        path.strip_prefix(self.out_dir)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/")
    }

    fn split(&self, ds: &LabeledDataset) -> Result<(LabeledDataset, LabeledDataset)> {
        stratified_split(ds, self.cfg.test_fraction, self.cfg.seed)
    }

    fn mlp_base(&self) -> MlpConfig {
        MlpConfig {
            seed: self.cfg.seed,
            ..MlpConfig::default()
        }
    }

    fn train_model(&mut self, job: ModelJob<'_>) -> Result<()> {
        let dir = self.out_dir.join(job.stage.dir()).join(&job.name);
        create_dir(&dir)?;
        info!("{}: training {}", job.stage, job.name);

        let start = Instant::now();
        let scaler = job.scaling.final_scaler(job.train)?;
        let x = match &scaler {
            Some(p) => p.apply(job.train.x.view())?,
            None => job.train.x.clone(),
        };
        let n_classes = job.train.n_classes();
        let (model, history) = match &job.candidate {
            Candidate::Svm(p) => (TrainedModel::Svm(p.fit(x.view(), &job.train.y, n_classes, &self.smo)?), None),
            Candidate::Mlp(c) => {
                let (m, h) = mlp::fit(c, x.view(), &job.train.y, n_classes)?;
                (TrainedModel::Mlp(m), Some(h))
            }
        };
        let fit_seconds = start.elapsed().as_secs_f64();
        let converged = match (&model, &history) {
            (TrainedModel::Svm(m), _) => m.converged(),
            (_, Some(h)) => h.converged,
            _ => true,
        };
        let saved = SavedModel::new(job.train.codec.classes().to_vec(), scaler, model);

        let mut artifacts = Vec::new();
        let model_path = dir.join("model.json");
        save_model(&model_path, &saved)?;
        artifacts.push(self.rel(&model_path));
        if let Some(h) = &history {
            let p = dir.join("history.csv");
            h.write_csv(&p)?;
            artifacts.push(self.rel(&p));
        }

        let est = Scaled {
            scaler: job.scaling.fold_scaler(),
            inner: CandidateEstimator {
                candidate: job.candidate.clone(),
                smo: self.smo,
            },
        };
        let cv_rows = job.scaling.cv_view(job.train)?;
        let cv_scores = match job.cv_scores {
            Some(s) => s,
            None => cross_val_score(&est, &cv_rows, self.cfg.search_k, self.cfg.seed)?,
        };
        let curve = learning_curve(
            &est,
            &cv_rows,
            &self.cfg.learning_curve_fractions,
            self.cfg.search_k,
            self.cfg.seed,
        )?;

        let train_dir = dir.join("train");
        let train_summary = evaluate_into(&saved, job.train, format!("{} (train)", job.name), None, None, &train_dir)?;
        let test_dir = dir.join("test");
        let test_summary = evaluate_into(
            &saved,
            job.test,
            format!("{} (test)", job.name),
            Some(curve),
            Some(cv_scores.clone()),
            &test_dir,
        )?;
        artifacts.push(self.rel(&train_dir.join("report.json")));
        artifacts.push(self.rel(&test_dir.join("report.json")));

        if !converged {
            let msg = format!("{}: {} did not converge", job.stage, job.name);
            warn!("{msg}");
            self.manifest.warnings.push(msg);
        }
        self.manifest.models.push(ModelRecord {
            stage: job.stage.number(),
            name: job.name,
            kind: saved.kind(),
            scaler: job.scaling.choice,
            preprocessing: job.preprocessing,
            channel: job.channel,
            params: job.candidate,
            train_accuracy: train_summary.accuracy,
            test_accuracy: test_summary.accuracy,
            test_macro_auc: test_summary.macro_auc,
            test_macro_average_precision: test_summary.macro_average_precision,
            cv_mean: cv_scores.iter().sum::<f64>() / cv_scores.len() as f64,
            cv_std: population_std(&cv_scores),
            cv_scores,
            converged,
            n_train: job.train.len(),
            n_test: job.test.len(),
            artifacts,
            fit_seconds,
        });
        Ok(())
    }

    fn search(
        &mut self,
        stage: Stage,
        name: &str,
        space: ParamSpace,
        scaling: &Scaling,
        channel: ChannelChoice,
        train: &LabeledDataset,
    ) -> Result<SearchResult> {
        let dir = self.out_dir.join(stage.dir()).join(name);
        create_dir(&dir)?;
        info!("{stage}: {name} over {} rows", train.len());
        let opts = SearchOptions {
            n_iter: self.cfg.search_n_iter,
            k: self.cfg.search_k,
            seed: self.cfg.seed,
            scaler: scaling.fold_scaler(),
            smo: self.smo,
        };
        let kind = match space {
            ParamSpace::Svm(_) => ModelKind::Svm,
            ParamSpace::Mlp(_) => ModelKind::Mlp,
        };
        let start = Instant::now();
        let result = randomized_search(&space, &scaling.cv_view(train)?, &opts)?;
        let search_seconds = start.elapsed().as_secs_f64();
        let best = result.best();
        if let Some(e) = &best.error {
            return Err(Error::invalid(format!("{stage}: every {name} candidate failed, last error: {e}")));
        }
        let csv = dir.join("search.csv");
        result.write_csv(&csv)?;
        let surface = dir.join("search_surface.csv");
        result.write_surface_csv(&surface)?;
        let failed = result.candidates.iter().filter(|c| c.error.is_some()).count();
        if failed > 0 {
            self.manifest
                .warnings
                .push(format!("{stage}: {failed} {name} candidate(s) failed"));
        }
        self.manifest.searches.push(SearchRecord {
            stage: stage.number(),
            name: name.to_string(),
            kind,
            scaler: scaling.choice,
            channel,
            n_iter: opts.n_iter,
            k: opts.k,
            n_rows: train.len(),
            best_index: result.best_index,
            best_params: best.params.clone(),
            best_mean: best.mean,
            best_std: best.std,
            failed_candidates: failed,
            artifacts: vec![self.rel(&csv), self.rel(&surface)],
            search_seconds,
        });
        Ok(result)
    }

    /// Search both families on `train`, then train each winner.
    #[allow(clippy::too_many_arguments)]
    fn optimize_pair(
        &mut self,
        stage: Stage,
        suffix: &str,
        scaling: &Scaling,
        channel: ChannelChoice,
        preprocessing: Vec<String>,
        train: &LabeledDataset,
        test: &LabeledDataset,
    ) -> Result<()> {
        let svm_space = ParamSpace::Svm(SvmSpace::default());
        let mlp_space = ParamSpace::Mlp(MlpSpace {
            base: self.mlp_base(),
            ..MlpSpace::default()
        });
        let svm = self.search(stage, &format!("svm_search{suffix}"), svm_space, scaling, channel, train)?;
        let mlp = self.search(stage, &format!("mlp_search{suffix}"), mlp_space, scaling, channel, train)?;
        for (family, result) in [("svm", svm), ("mlp", mlp)] {
            let best = result.best();
            self.train_model(ModelJob {
                stage,
                name: format!("{family}_optimized{suffix}"),
                candidate: best.params.clone(),
                scaling,
                channel,
                preprocessing: preprocessing.clone(),
                train,
                test,
                cv_scores: Some(best.fold_scores.clone()),
            })?;
        }
        Ok(())
    }

    fn scaling_comparison(&mut self, ds: &LabeledDataset) -> Result<()> {
        let stage = Stage::ScalingComparison;
        let (train, test) = self.split(ds)?;
        let mut jobs: Vec<(String, Candidate, ScalerChoice)> = Vec::new();
        for choice in ScalerChoice::ALL {
            jobs.push((format!("svm_{choice}"), Candidate::Svm(SvmParams::default()), choice));
        }
        for choice in ScalerChoice::ALL {
            jobs.push((format!("mlp_{choice}"), Candidate::Mlp(self.mlp_base()), choice));
        }
        jobs.push((
            "mlp_standard_early_stopping".into(),
            Candidate::Mlp(MlpConfig {
                early_stopping: true,
                ..self.mlp_base()
            }),
            ScalerChoice::Standard,
        ));
        for (name, candidate, choice) in jobs {
            let scaling = Scaling::new(self.cfg, choice, ds)?;
            self.train_model(ModelJob {
                stage,
                name,
                candidate,
                preprocessing: vec![scaling.describe()],
                scaling: &scaling,
                channel: self.cfg.channel,
                train: &train,
                test: &test,
                cv_scores: None,
            })?;
        }
        Ok(())
    }

    fn optimized(&mut self, ds: &LabeledDataset) -> Result<()> {
        let (train, test) = self.split(ds)?;
        let scaling = Scaling::new(self.cfg, self.cfg.scaler, ds)?;
        let pre = vec![scaling.describe()];
        self.optimize_pair(Stage::Optimized, "", &scaling, self.cfg.channel, pre, &train, &test)
    }

    fn augmented_smote(&mut self, ds: &LabeledDataset, augmented: Option<&LabeledDataset>) -> Result<()> {
        let stage = Stage::AugmentedSmote;
        let mut pre = Vec::new();
        if !self.cfg.augmentations.is_empty() {
            let tags: Vec<String> = self.cfg.augmentations.iter().map(|a| a.tag()).collect();
            pre.push(format!("augment:{}", tags.join(",")));
        }
        if self.cfg.smote {
            pre.push(format!("smote:k{}", self.cfg.smote_k));
        }

        if self.cfg.paper_faithful {
            let mut all = ds.clone();
            if let Some(aug) = augmented {
                all = all.concat(aug)?;
            }
            let scaling = Scaling::new(self.cfg, self.cfg.scaler, &all)?;
            if self.cfg.smote {
                all = smote_scaled(&all, scaling.fixed.as_ref(), self.cfg.smote_k, self.cfg.seed)?;
            }
            pre.push(scaling.describe());
            pre.push("split after augmentation and oversampling".into());
            let (train, test) = self.split(&all)?;
            return self.optimize_pair(stage, "", &scaling, self.cfg.channel, pre, &train, &test);
        }

        let (mut train, test) = self.split(ds)?;
        if let Some(aug) = augmented {
            let bases: HashSet<&str> = train.meta.iter().map(|m| m.path.as_str()).collect();
            let keep: Vec<usize> = (0..aug.len())
                .filter(|&i| bases.contains(base_path(&aug.meta[i].path)))
                .collect();
            train = train.concat(&aug.subset(&keep))?;
        }
        let scaling = Scaling::new(self.cfg, self.cfg.scaler, &train)?;
        if self.cfg.smote {
            let scaler = scaling.final_scaler(&train)?;
            train = smote_scaled(&train, scaler.as_ref(), self.cfg.smote_k, self.cfg.seed)?;
        }
        pre.push(scaling.describe());
        self.optimize_pair(stage, "", &scaling, self.cfg.channel, pre, &train, &test)
    }

    fn channel_split(&mut self, ds: &LabeledDataset) -> Result<()> {
        for (channel, choice) in [
            (VocalChannel::Speech, ChannelChoice::Speech),
            (VocalChannel::Song, ChannelChoice::Song),
        ] {
            let sub = keep_channel(ds, Some(channel))?;
            let (train, test) = self.split(&sub)?;
            let scaling = Scaling::new(self.cfg, self.cfg.scaler, &sub)?;
            let pre = vec![format!("channel:{choice}"), scaling.describe()];
            self.optimize_pair(Stage::ChannelSplit, &format!("_{choice}"), &scaling, choice, pre, &train, &test)?;
        }
        Ok(())
    }
}

/// SMOTE in the space a classifier sees: rows are scaled with `scaler`,
/// oversampled, and the synthetic rows mapped back to raw feature units.
/// Original rows are returned untouched, synthetic rows follow them.
pub fn smote_scaled(ds: &LabeledDataset, scaler: Option<&ScalerParams>, k: usize, seed: u64) -> Result<LabeledDataset> {
    let Some(p) = scaler else {
        return smote(ds, k, seed);
    };
    let balanced = smote(&ds.with_x(p.apply(ds.x.view())?)?, k, seed)?;
    let synthetic = p.invert(balanced.x.slice(s![ds.len().., ..]))?;
    let x = ndarray::concatenate(ndarray::Axis(0), &[ds.x.view(), synthetic.view()]).expect("widths match");
    balanced.with_x(x)
}

/// Reject bad configurations and inputs before any model is trained.
fn check_inputs(stages: &[Stage], cfg: &ExperimentConfig, inputs: &StageInputs) -> Result<()> {
    cfg.validate()?;
    if stages.is_empty() {
        return Err(Error::invalid("no stage selected"));
    }
    let dim = FeatureLayout::new(&cfg.feature_config()).dim();
    let tables = std::iter::once(("features", &inputs.features))
        .chain(inputs.augmented.as_ref().map(|a| ("augmented features", a)));
    for (what, ds) in tables {
        if ds.n_features() != dim {
            return Err(Error::Schema(format!(
                "{what} have {} columns but the configured extractor produces {dim}",
                ds.n_features()
            )));
        }
    }
    if inputs.features.n_classes() < 2 {
        return Err(Error::invalid("features hold fewer than two classes"));
    }
    if stages.contains(&Stage::AugmentedSmote) && !cfg.augmentations.is_empty() && inputs.augmented.is_none() {
        return Err(Error::invalid(
            "stage 3 needs augmented features (or an empty augmentation list in the config)",
        ));
    }
    if let Some(aug) = &inputs.augmented {
        if aug.codec != inputs.features.codec {
            return Err(Error::Schema("augmented features use different classes".into()));
        }
    }
    Ok(())
}

/// Run `stages` in order, writing every artifact under `out_dir` and the
/// manifest to `out_dir/manifest.json`.
pub fn reproduce(stages: &[Stage], cfg: &ExperimentConfig, inputs: &StageInputs, out_dir: &Path) -> Result<RunManifest> {
    check_inputs(stages, cfg, inputs)?;
    create_dir(out_dir)?;
    let start = Instant::now();
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();

    let channel = cfg.channel.channel();
    let ds = keep_channel(&inputs.features, channel)?;
    let augmented = match (&inputs.augmented, cfg.augmentations.is_empty()) {
        (Some(a), false) => Some(keep_channel(a, channel).and_then(|a| recode(&a, &ds))?),
        _ => None,
    };

    let mut runner = Runner {
        cfg,
        out_dir,
        smo: SmoOptions::default(),
        manifest: RunManifest::new(cfg.clone()),
    };
    for &stage in &stages {
        match stage {
            Stage::ScalingComparison => runner.scaling_comparison(&ds)?,
            Stage::Optimized => runner.optimized(&ds)?,
            Stage::AugmentedSmote => runner.augmented_smote(&ds, augmented.as_ref())?,
            Stage::ChannelSplit => runner.channel_split(&inputs.features)?,
        }
        runner.manifest.stages.push(stage.number());
    }
    let mut manifest = runner.manifest;
    manifest.total_seconds = start.elapsed().as_secs_f64();
    manifest.write(&manifest_path(out_dir))?;
    Ok(manifest)
}

/// Run a single stage; see [`reproduce`].
pub fn run_stage(stage: Stage, cfg: &ExperimentConfig, inputs: &StageInputs, out_dir: &Path) -> Result<RunManifest> {
    reproduce(&[stage], cfg, inputs, out_dir)
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("manifest.json")
}
