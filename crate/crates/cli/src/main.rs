//! `emovox`: vocal emotion recognition from the command line.
//!
//! Exit status is 0 on success, 2 for bad input (arguments, files, data),
//! 3 when a run finished but some model did not converge, and 1 for any
//! other failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use emovox::augment::AugmentSpec;
use emovox::evaluation::{evaluate, render_report, ReportBundle};
use emovox::experiment::{
    demo_corpus, extract_augmented, extract_manifest, load_model, reproduce, save_model, smote_scaled,
    write_augmented_corpus, ChannelChoice, ExperimentConfig, ModelKind, RunManifest, SavedModel, ScalerChoice,
    Stage, StageInputs, TrainedModel,
};
use emovox::ingest::{scan_corpus, CorpusManifest};
use emovox::mlp::{self, MlpConfig};
use emovox::model_select::{randomized_search, Candidate, MlpSpace, ParamSpace, SearchOptions, SvmSpace};
use emovox::preprocess::{fit_scaler, read_feature_csv, stratified_split, write_feature_csv, LabeledDataset};
use emovox::svm::{SmoOptions, SvmParams};

const ROOT_ENV: &str = "EMOVOX_RAVDESS_ROOT";

#[derive(Parser)]
#[command(name = "emovox", version, about = "Vocal emotion recognition with SVM and MLP classifiers")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a RAVDESS directory into a corpus manifest.
    Ingest(IngestArgs),
    /// Compute one feature row per manifest clip.
    Extract(ExtractArgs),
    /// Write augmented copies of every manifest clip.
    Augment(AugmentArgs),
    /// Split a feature table, with optional SMOTE on the training part.
    Preprocess(PreprocessArgs),
    /// Randomized hyperparameter search with stratified k-fold CV.
    Search(SearchArgs),
    /// Fit one classifier and save it as a model file.
    Train(TrainArgs),
    /// Evaluate a model file on a feature table and render the report.
    Evaluate(EvaluateArgs),
    /// Run the four-stage study, or some of its stages.
    Reproduce(ReproduceArgs),
    /// Generate the synthetic six-class demo corpus.
    DemoCorpus(DemoArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, env = ROOT_ENV)]
    root: PathBuf,
    #[arg(long, default_value = "all")]
    channel: ChannelChoice,
    #[arg(long, default_value_t = emovox::ingest::DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Experiment config whose STFT and filterbank settings are used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Fade length in seconds; repeat for several copies.
    #[arg(long)]
    fade: Vec<f64>,
    /// Pitch factor; repeat for several copies.
    #[arg(long)]
    tone: Vec<f64>,
    /// Directory for the WAV copies and their `corpus.json`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value = "standard")]
    scaler: ScalerChoice,
    #[arg(long, default_value_t = 0.2)]
    test_frac: f64,
    /// Balance the training split with SMOTE.
    #[arg(long)]
    smote: bool,
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 10)]
    n_iter: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Scaler refit inside every fold.
    #[arg(long, default_value = "standard")]
    scaler: ScalerChoice,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: ModelKind,
    /// Parameters as written by `search` (`best_params.json`); defaults
    /// otherwise.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "standard")]
    scaler: ScalerChoice,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Refuse model files of the other family.
    #[arg(long)]
    kind: Option<ModelKind>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// `1`, `2`, `3`, `4`, a comma list such as `2,3`, or `all`.
    #[arg(long, default_value = "all")]
    stage: String,
    /// RAVDESS-style corpus to ingest and extract first.
    #[arg(long, env = ROOT_ENV, conflicts_with = "features")]
    root: Option<PathBuf>,
    /// Precomputed feature table of original clips.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Precomputed feature table of augmented copies, for stage 3.
    #[arg(long, requires = "features")]
    augmented: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// JSON experiment config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-corpus preset (search n_iter 50).
    #[arg(long)]
    paper_preset: bool,
    /// Scale on all rows before CV and oversample before splitting.
    #[arg(long)]
    paper_faithful: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    scaler: Option<ScalerChoice>,
    #[arg(long)]
    channel: Option<ChannelChoice>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Outcome of a command that completed.
enum Status {
    Ok,
    ConvergenceWarning,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ConvergenceWarning) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<emovox::Error>() {
            return if err.is_input_error() { 2 } else { 1 };
        }
        if cause.is::<serde_json::Error>() || cause.is::<InputError>() {
            return 2;
        }
    }
    1
}

/// A bad argument detected by the front end itself.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(InputError(msg.into()))
}

fn run(command: Command) -> anyhow::Result<Status> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a),
        Command::Augment(a) => augment(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Search(a) => search(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Reproduce(a) => reproduce_cmd(a),
        Command::DemoCorpus(a) => demo(a),
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load_dataset(path: &Path) -> anyhow::Result<LabeledDataset> {
    let (x, meta) = read_feature_csv(path)?;
    Ok(LabeledDataset::from_rows(x, meta)?)
}

fn ingest(a: IngestArgs) -> anyhow::Result<Status> {
    let manifest = scan_corpus(&a.root, a.channel.channel(), a.sample_rate)?;
    manifest.write(&a.out)?;
    println!(
        "{} clips ({} skipped) -> {}",
        manifest.entries.len(),
        manifest.skipped.len(),
        a.out.display()
    );
    Ok(Status::Ok)
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    })
}

fn extract(a: ExtractArgs) -> anyhow::Result<Status> {
    let cfg = load_config(a.config.as_deref())?;
    let manifest = CorpusManifest::read(&a.manifest)?;
    let table = extract_manifest(&manifest, cfg.feature_config())?;
    write_feature_csv(&a.out, &table.x, &table.meta)?;
    println!("{} rows ({} skipped) -> {}", table.meta.len(), table.warnings.len(), a.out.display());
    Ok(Status::Ok)
}

fn augment(a: AugmentArgs) -> anyhow::Result<Status> {
    let specs: Vec<AugmentSpec> = a
        .fade
        .iter()
        .map(|&fade_seconds| AugmentSpec::FadeInOut { fade_seconds })
        .chain(a.tone.iter().map(|&tone_factor| AugmentSpec::ChangeTone { tone_factor }))
        .collect();
    if specs.is_empty() {
        return Err(input_error("give at least one --fade or --tone"));
    }
    let manifest = CorpusManifest::read(&a.manifest)?;
    let out = write_augmented_corpus(&manifest, &specs, &a.out_dir)?;
    let path = a.out_dir.join("corpus.json");
    out.write(&path)?;
    println!("{} augmented clips -> {}", out.entries.len(), path.display());
    Ok(Status::Ok)
}

fn preprocess(a: PreprocessArgs) -> anyhow::Result<Status> {
    let ds = load_dataset(&a.features)?;
    let (mut train, test) = stratified_split(&ds, a.test_frac, a.seed)?;
    let scaler = a.scaler.kind().map(|k| fit_scaler(train.x.view(), k)).transpose()?;
    if a.smote {
        train = smote_scaled(&train, scaler.as_ref(), a.smote_k, a.seed)?;
    }
    // The scaler is refit on the final training rows, SMOTE included.
    let scaler = a.scaler.kind().map(|k| fit_scaler(train.x.view(), k)).transpose()?;
    create_dir(&a.out_dir)?;
    write_feature_csv(&a.out_dir.join("train.csv"), &train.x, &train.meta)?;
    write_feature_csv(&a.out_dir.join("test.csv"), &test.x, &test.meta)?;
    write_json(&a.out_dir.join("scaler.json"), &scaler)?;
    write_json(&a.out_dir.join("labels.json"), &ds.codec)?;
    println!("train {} rows, test {} rows -> {}", train.len(), test.len(), a.out_dir.display());
    Ok(Status::Ok)
}

fn search(a: SearchArgs) -> anyhow::Result<Status> {
    let ds = load_dataset(&a.features)?;
    let space = match a.model {
        ModelKind::Svm => ParamSpace::Svm(SvmSpace::default()),
        ModelKind::Mlp => ParamSpace::Mlp(MlpSpace {
            base: MlpConfig {
                seed: a.seed,
                ..MlpConfig::default()
            },
            ..MlpSpace::default()
        }),
    };
    let opts = SearchOptions {
        n_iter: a.n_iter,
        k: a.k,
        seed: a.seed,
        scaler: a.scaler.kind(),
        smo: SmoOptions::default(),
    };
    let result = randomized_search(&space, &ds, &opts)?;
    create_dir(&a.out_dir)?;
    result.write_csv(&a.out_dir.join("search.csv"))?;
    result.write_surface_csv(&a.out_dir.join("search_surface.csv"))?;
    let best = result.best();
    if let Some(e) = &best.error {
        bail!("every candidate failed; last error: {e}");
    }
    write_json(&a.out_dir.join("best_params.json"), &best.params)?;
    let params: Vec<String> = best.params.describe().iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!(
        "best candidate {} mean {:.4} std {:.4}: {}",
        result.best_index,
        best.mean,
        best.std,
        params.join(" ")
    );
    Ok(Status::Ok)
}

fn train(a: TrainArgs) -> anyhow::Result<Status> {
    let ds = load_dataset(&a.features)?;
    let candidate = match &a.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<Candidate>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => match a.model {
            ModelKind::Svm => Candidate::Svm(SvmParams::default()),
            ModelKind::Mlp => Candidate::Mlp(MlpConfig {
                seed: a.seed,
                ..MlpConfig::default()
            }),
        },
    };
    let scaler = a.scaler.kind().map(|k| fit_scaler(ds.x.view(), k)).transpose()?;
    let x = match &scaler {
        Some(s) => s.apply(ds.x.view())?,
        None => ds.x.clone(),
    };
    let (model, converged) = match (a.model, candidate) {
        (ModelKind::Svm, Candidate::Svm(p)) => {
            let m = p.fit(x.view(), &ds.y, ds.n_classes(), &SmoOptions::default())?;
            let c = m.converged();
            (TrainedModel::Svm(m), c)
        }
        (ModelKind::Mlp, Candidate::Mlp(c)) => {
            let (m, h) = mlp::fit(&c, x.view(), &ds.y, ds.n_classes())?;
            (TrainedModel::Mlp(m), h.converged)
        }
        (kind, _) => return Err(input_error(format!("parameter file does not describe a {kind} model"))),
    };
    let saved = SavedModel::new(ds.codec.classes().to_vec(), scaler, model);
    save_model(&a.out, &saved)?;
    println!("{} model -> {}", saved.kind(), a.out.display());
    if converged {
        Ok(Status::Ok)
    } else {
        warn!("training stopped before convergence");
        Ok(Status::ConvergenceWarning)
    }
}

fn evaluate_cmd(a: EvaluateArgs) -> anyhow::Result<Status> {
    let saved = load_model(&a.model, a.kind)?;
    let (x, meta) = read_feature_csv(&a.features)?;
    let y_true = meta
        .iter()
        .map(|m| {
            saved
                .classes
                .iter()
                .position(|c| c == m.emotion.name())
                .ok_or_else(|| input_error(format!("class {:?} of row {} is unknown to the model", m.emotion.name(), m.path)))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (y_pred, scores) = saved.predict_with_scores(x.view())?;
    let report = evaluate(&ReportBundle {
        title: a.model.display().to_string(),
        class_names: saved.classes.clone(),
        y_true,
        y_pred,
        scores,
        learning_curve: None,
        cv_scores: None,
    })?;
    let files = render_report(&report, &a.out_dir)?;
    println!(
        "accuracy {:.4} on {} rows; {} files -> {}",
        report.report.accuracy,
        report.n_samples,
        files.len(),
        a.out_dir.display()
    );
    Ok(Status::Ok)
}

fn parse_stages(s: &str) -> anyhow::Result<Vec<Stage>> {
    if s == "all" {
        return Ok(Stage::ALL.to_vec());
    }
    s.split(',')
        .map(|p| {
            let n: u8 = p
                .trim()
                .parse()
                .map_err(|_| input_error(format!("bad stage {p:?}: use 1, 2, 3, 4 or all")))?;
            Ok(Stage::from_number(n)?)
        })
        .collect()
}

fn reproduce_cmd(a: ReproduceArgs) -> anyhow::Result<Status> {
    let stages = parse_stages(&a.stage)?;
    let mut cfg = match (&a.config, a.paper_preset) {
        (Some(p), _) => ExperimentConfig::read(p)?,
        (None, true) => ExperimentConfig::paper(),
        (None, false) => ExperimentConfig::default(),
    };
    if a.paper_faithful {
        cfg.paper_faithful = true;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.n_iter {
        cfg.search_n_iter = n;
    }
    if let Some(s) = a.scaler {
        cfg.scaler = s;
    }
    if let Some(c) = a.channel {
        cfg.channel = c;
    }
    cfg.validate()?;
    create_dir(&a.out_dir)?;
    let needs_augmented = stages.contains(&Stage::AugmentedSmote) && !cfg.augmentations.is_empty();

    let inputs = match (&a.root, &a.features) {
        (_, Some(f)) => StageInputs::load(f, a.augmented.as_deref())?,
        (Some(root), None) => {
            let manifest = scan_corpus(root, None, cfg.sample_rate)?;
            manifest.write(&a.out_dir.join("corpus.json"))?;
            info!("extracting features of {} clips", manifest.entries.len());
            let table = extract_manifest(&manifest, cfg.feature_config())?;
            let features_path = a.out_dir.join("features.csv");
            write_feature_csv(&features_path, &table.x, &table.meta)?;
            let augmented_path = if needs_augmented {
                info!("extracting features of {} augmented copies", manifest.entries.len() * cfg.augmentations.len());
                let aug = extract_augmented(&manifest, cfg.feature_config(), &cfg.augmentations)?;
                let p = a.out_dir.join("features_augmented.csv");
                write_feature_csv(&p, &aug.x, &aug.meta)?;
                Some(p)
            } else {
                None
            };
            StageInputs::load(&features_path, augmented_path.as_deref())?
        }
        (None, None) => {
            return Err(input_error(format!("give --root, --features or set {ROOT_ENV}")));
        }
    };
    let manifest = reproduce(&stages, &cfg, &inputs, &a.out_dir)?;
    print_summary(&manifest);
    if manifest.has_convergence_warning() {
        for w in &manifest.warnings {
            warn!("{w}");
        }
        Ok(Status::ConvergenceWarning)
    } else {
        Ok(Status::Ok)
    }
}

fn print_summary(m: &RunManifest) {
    println!("{:<6} {:<32} {:>9} {:>9} {:>9}", "stage", "model", "train", "test", "cv_mean");
    for r in &m.models {
        println!(
            "{:<6} {:<32} {:>9.4} {:>9.4} {:>9.4}{}",
            r.stage,
            r.name,
            r.train_accuracy,
            r.test_accuracy,
            r.cv_mean,
            if r.converged { "" } else { "  (not converged)" }
        );
    }
    println!("{} models, {} searches", m.models.len(), m.searches.len());
}

fn demo(a: DemoArgs) -> anyhow::Result<Status> {
    let paths = demo_corpus(&a.out_dir, a.seed)?;
    println!("{} clips -> {}", paths.len(), a.out_dir.display());
    Ok(Status::Ok)
}
