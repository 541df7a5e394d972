//! Acceptance criteria, one PASS/FAIL/SKIP line each.
//!
//! Criteria 1 to 5 need a local RAVDESS copy named by `EMOVOX_RAVDESS_ROOT`
//! and are skipped without one. Criteria 6 to 12 always run. The process
//! exits non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use emovox::evaluation::{confusion_matrix, pr_average_precision, roc_auc};
use emovox::features::{FeatureConfig, FeatureExtractor};
use emovox::ingest::{read_wav, Emotion, VocalChannel};
use emovox::mlp::{init_weights, max_gradient_error, one_hot, Activation, MlpModel};
use emovox::preprocess::{smote, LabelCodec, LabeledDataset, RowMeta};
use emovox::svm::{max_kkt_residual, solve_dual, KernelSpec, SmoOptions};

const ROOT_ENV: &str = "EMOVOX_RAVDESS_ROOT";

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

/// A check's verdict, failed when it ran past `budget`.
fn timed(budget: Duration, check: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    match result {
        Ok(detail) if elapsed <= budget => Outcome::Pass(format!("{detail} ({elapsed:.1?})")),
        Ok(detail) => Outcome::Fail(format!("{detail}, but took {elapsed:.1?} > {budget:?}")),
        Err(detail) => Outcome::Fail(format!("{detail} ({elapsed:.1?})")),
    }
}

fn emovox(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_emovox"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning emovox: {e}"))?;
    let code = out.status.code().unwrap_or(-1);
    if code == 0 || code == 3 {
        Ok(code)
    } else {
        Err(format!(
            "emovox {} exited {code}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn model<'a>(manifest: &'a Value, stage: u64, name: &str) -> Result<&'a Value, String> {
    manifest["models"]
        .as_array()
        .and_then(|m| m.iter().find(|r| r["stage"] == stage && r["name"] == name))
        .ok_or_else(|| format!("manifest has no stage-{stage} model {name}"))
}

fn test_accuracy(manifest: &Value, stage: u64, name: &str) -> Result<f64, String> {
    model(manifest, stage, name)?["test_accuracy"]
        .as_f64()
        .ok_or_else(|| format!("{name} has no test accuracy"))
}

/// The full study on a local corpus, shared by criteria 1 to 5.
struct CorpusRun {
    dir: tempfile::TempDir,
    manifest: Result<Value, String>,
    elapsed: Duration,
}

fn corpus_run(root: &Path) -> CorpusRun {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path().join("run");
    let start = Instant::now();
    let out_str = out.to_string_lossy().into_owned();
    let root_str = root.to_string_lossy().into_owned();
    let manifest = emovox(&[
        "reproduce",
        "--root",
        &root_str,
        "--stage",
        "all",
        "--paper-preset",
        "--out-dir",
        &out_str,
    ])
    .and_then(|_| read_json(&out.join("manifest.json")));
    CorpusRun {
        dir,
        manifest,
        elapsed: start.elapsed(),
    }
}

fn dataset_criteria(results: &mut Vec<(u32, &'static str, Outcome)>) {
    let names = [
        (1, "corpus holds 2068 clips"),
        (2, "stage-2 SVM test accuracy >= 0.75"),
        (3, "stage-2 MLP test accuracy >= 0.70"),
        (4, "song beats speech for both algorithms"),
        (5, "stage-3 SVM and MLP within 0.08"),
    ];
    let Some(root) = std::env::var_os(ROOT_ENV).map(PathBuf::from) else {
        for (n, name) in names {
            results.push((n, name, Outcome::Skip(format!("{ROOT_ENV} not set"))));
        }
        return;
    };
    let run = corpus_run(&root);
    let m = match &run.manifest {
        Ok(m) => m,
        Err(e) => {
            for (n, name) in names {
                results.push((n, name, Outcome::Fail(e.clone())));
            }
            return;
        }
    };
    let verdict = |ok: Result<(bool, String), String>| match ok {
        Ok((true, d)) => Outcome::Pass(d),
        Ok((false, d)) => Outcome::Fail(d),
        Err(e) => Outcome::Fail(e),
    };

    let corpus = read_json(&run.dir.path().join("run/corpus.json"));
    results.push((
        1,
        names[0].1,
        verdict(corpus.map(|c| {
            let n = c["entries"].as_array().map_or(0, |e| e.len());
            (n == 2068, format!("{n} clips"))
        })),
    ));
    let budget = Duration::from_secs(2 * 3600);
    results.push((
        2,
        names[1].1,
        verdict(test_accuracy(m, 2, "svm_optimized").map(|a| {
            (
                a >= 0.75 && run.elapsed <= budget,
                format!("test accuracy {a:.4}, full run {:.0?}", run.elapsed),
            )
        })),
    ));
    results.push((
        3,
        names[2].1,
        verdict(test_accuracy(m, 2, "mlp_optimized").map(|a| (a >= 0.70, format!("test accuracy {a:.4}")))),
    ));
    let ordering = (|| {
        let mut detail = Vec::new();
        let mut ok = true;
        for family in ["svm", "mlp"] {
            let song = test_accuracy(m, 4, &format!("{family}_optimized_song"))?;
            let speech = test_accuracy(m, 4, &format!("{family}_optimized_speech"))?;
            ok &= song > speech;
            detail.push(format!("{family} song {song:.4} vs speech {speech:.4}"));
        }
        Ok((ok, detail.join(", ")))
    })();
    results.push((4, names[3].1, verdict(ordering)));
    let gap = (|| {
        let svm = test_accuracy(m, 3, "svm_optimized")?;
        let mlp = test_accuracy(m, 3, "mlp_optimized")?;
        Ok(((svm - mlp).abs() <= 0.08, format!("svm {svm:.4}, mlp {mlp:.4}")))
    })();
    results.push((5, names[4].1, verdict(gap)));
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn json_matrix(v: &Value) -> Result<Array2<f64>, String> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    let (r, c) = (rows.len(), rows.first().map_or(0, |row| row.len()));
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect()).map_err(|e| e.to_string())
}

/// Largest `|got − want| / |want|`, with reference magnitudes below `1e-9`
/// of the matrix peak replaced by that floor.
fn max_relative_error(got: ArrayView2<f64>, want: ArrayView2<f64>) -> Result<f64, String> {
    if got.dim() != want.dim() {
        return Err(format!("shape {:?} vs reference {:?}", got.dim(), want.dim()));
    }
    let peak = want.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * peak;
    Ok(got
        .iter()
        .zip(want.iter())
        .map(|(g, w)| (g - w).abs() / w.abs().max(floor))
        .fold(0.0, f64::max))
}

fn dsp_oracle() -> Result<String, String> {
    let golden = read_json(&golden_dir().join("golden.json"))?;
    let field = |k: &str| golden[k].as_u64().ok_or_else(|| format!("golden.json lacks {k}"));
    let config = FeatureConfig {
        n_fft: field("n_fft")? as usize,
        hop: field("hop")? as usize,
        n_mels: field("n_mels")? as usize,
        n_mfcc: field("n_mfcc")? as usize,
    };
    let extractor = FeatureExtractor::new(config, field("sample_rate")? as u32).map_err(|e| e.to_string())?;
    let clips = golden["clips"].as_array().ok_or("golden.json lacks clips")?;
    if clips.len() != 5 {
        return Err(format!("{} golden clips, expected 5", clips.len()));
    }
    let (mut worst_mel, mut worst_mfcc) = (0.0_f64, 0.0_f64);
    for clip in clips {
        let file = clip["file"].as_str().ok_or("clip without file")?;
        let audio = read_wav(&golden_dir().join(file)).map_err(|e| e.to_string())?;
        let spec = extractor.spectrogram(&audio).map_err(|e| e.to_string())?;
        let mel = extractor.mel(&spec).map_err(|e| e.to_string())?;
        let mfcc = extractor.mfcc(&audio).map_err(|e| e.to_string())?;
        worst_mel = worst_mel.max(max_relative_error(mel.view(), json_matrix(&clip["mel"])?.view())?);
        worst_mfcc = worst_mfcc.max(max_relative_error(mfcc.view(), json_matrix(&clip["mfcc"])?.view())?);
    }
    let detail = format!("max relative error mel {worst_mel:.2e}, mfcc {worst_mfcc:.2e}");
    if worst_mel < 1e-3 && worst_mfcc < 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const KINK_MARGIN: f64 = 1e-3;

/// Smallest `|z|` over the hidden-layer pre-activations of `x`.
fn min_hidden_preactivation(model: &MlpModel, x: &Array2<f64>) -> Result<f64, String> {
    let cache = model.forward(x.view()).map_err(|e| e.to_string())?;
    let hidden = model.weights.len() - 1;
    let min = (0..hidden)
        .flat_map(|l| (cache.activations[l].dot(&model.weights[l]) + &model.biases[l]).into_iter())
        .fold(f64::INFINITY, |m, z| m.min(z.abs()));
    Ok(min)
}

fn gradient_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let activations = [Activation::Relu, Activation::Tanh, Activation::Logistic];
    let mut worst = 0.0_f64;
    for net in 0..50 {
        let layers = rng.random_range(1..=2);
        let hidden: Vec<usize> = (0..layers).map(|_| rng.random_range(2..=6)).collect();
        let d_in = rng.random_range(2..=5);
        let n_classes = rng.random_range(2..=4);
        let rows = rng.random_range(3..=8);
        let act = activations[net % 3];
        let mut model = init_weights(&hidden, act, d_in, n_classes, net as u64).map_err(|e| e.to_string())?;
        for b in &mut model.biases {
            b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
        // ReLU derivatives are only checked at least KINK_MARGIN from z = 0.
        let x = loop {
            let x = Array2::from_shape_fn((rows, d_in), |_| rng.random_range(-2.0..2.0));
            if act != Activation::Relu || min_hidden_preactivation(&model, &x)? >= KINK_MARGIN {
                break x;
            }
        };
        let y: Vec<usize> = (0..rows).map(|_| rng.random_range(0..n_classes)).collect();
        let alpha = rng.random_range(0.0..0.1);
        let err = max_gradient_error(&model, x.view(), one_hot(&y, n_classes).view(), alpha, 1e-6)
            .map_err(|e| e.to_string())?;
        worst = worst.max(err);
    }
    let detail = format!("50 nets, max relative error {worst:.2e}");
    if worst < 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn svm_correctness() -> Result<String, String> {
    let x = ndarray::array![[-1.0], [1.0]];
    let sol = solve_dual(x.view(), &[-1.0, 1.0], 10.0, &KernelSpec::linear(), &SmoOptions::default())
        .map_err(|e| e.to_string())?;
    if sol.alpha != [0.5, 0.5] || sol.bias != 0.0 {
        return Err(format!("2-point QP gave alpha {:?}, bias {}", sol.alpha, sol.bias));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_kkt = 0.0_f64;
    for p in 0..20 {
        let n = rng.random_range(8..40);
        let d = rng.random_range(1..5);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = rng.random_range(0.1..20.0);
        let kernel = match p % 3 {
            0 => KernelSpec::linear(),
            1 => KernelSpec::rbf(rng.random_range(0.1..2.0)),
            _ => KernelSpec::poly(rng.random_range(0.2..1.0), 2, 1.0),
        };
        let opts = SmoOptions {
            record_objective: true,
            ..SmoOptions::default()
        };
        let sol = solve_dual(x.view(), &y, c, &kernel, &opts).map_err(|e| e.to_string())?;
        let kkt = max_kkt_residual(x.view(), &y, c, &kernel, &sol.alpha, sol.bias);
        worst_kkt = worst_kkt.max(kkt);
        if !sol.converged || kkt > 1e-3 {
            return Err(format!("problem {p}: converged {}, KKT residual {kkt:.2e}", sol.converged));
        }
        if let Some(w) = sol.objective_trace.windows(2).find(|w| w[1] < w[0]) {
            return Err(format!("problem {p}: dual objective fell from {} to {}", w[0], w[1]));
        }
    }
    Ok(format!("2-point QP exact, 20 problems with max KKT residual {worst_kkt:.2e}, objectives monotone"))
}

/// Whether `row` lies on the segment between two same-class rows of
/// `originals`, coordinate by coordinate.
fn on_some_segment(row: &[f64], originals: &[Vec<f64>]) -> bool {
    originals.iter().enumerate().any(|(i, a)| {
        originals[i + 1..].iter().any(|b| {
            let (j, span) = a
                .iter()
                .zip(b)
                .map(|(p, q)| q - p)
                .enumerate()
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty rows");
            if span == 0.0 {
                return a.iter().zip(row).all(|(p, r)| (p - r).abs() <= 1e-12);
            }
            let u = (row[j] - a[j]) / span;
            (-1e-12..=1.0 + 1e-12).contains(&u)
                && a.iter()
                    .zip(b)
                    .zip(row)
                    .all(|((p, q), r)| (p + u * (q - p) - r).abs() <= 1e-9 * (1.0 + r.abs()))
        })
    })
}

fn smote_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut synthetic_total = 0;
    for trial in 0..10 {
        let counts: Vec<usize> = (0..3).map(|_| rng.random_range(2..20)).collect();
        let n: usize = counts.iter().sum();
        let y: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| vec![c; k]).collect();
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-3.0..3.0));
        let meta = (0..n)
            .map(|i| RowMeta {
                path: format!("r{i}"),
                channel: VocalChannel::Speech,
                emotion: Emotion::Calm,
                actor: 1,
            })
            .collect();
        let codec = LabelCodec::from_classes(vec!["a".into(), "b".into(), "c".into()]).map_err(|e| e.to_string())?;
        let ds = LabeledDataset::new(x, y, meta, codec).map_err(|e| e.to_string())?;
        let out = smote(&ds, 5, trial).map_err(|e| e.to_string())?;
        let balanced = out.class_counts();
        let majority = *counts.iter().max().expect("classes");
        if balanced.iter().any(|&c| c != majority) {
            return Err(format!("trial {trial}: counts {counts:?} became {balanced:?}"));
        }
        for r in n..out.len() {
            let class = out.y[r];
            let originals: Vec<Vec<f64>> = (0..n).filter(|&i| ds.y[i] == class).map(|i| ds.x.row(i).to_vec()).collect();
            if !on_some_segment(&out.x.row(r).to_vec(), &originals) {
                return Err(format!("trial {trial}: synthetic row {r} is not between two class-{class} rows"));
            }
        }
        synthetic_total += out.len() - n;
    }
    Ok(format!("10 datasets balanced, {synthetic_total} synthetic rows verified convex"))
}

fn metric_fixtures() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(1..200);
        let t: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let cm = confusion_matrix(&t, &p, 4).map_err(|e| e.to_string())?;
        let direct = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / n as f64;
        if cm.accuracy() != direct {
            return Err(format!("confusion accuracy {} vs direct {direct}", cm.accuracy()));
        }
    }
    let y = vec![0, 0, 1, 1, 2, 2, 2, 0];
    let perfect = Array2::from_shape_fn((8, 3), |(i, c)| if y[i] == c { 1.0 } else { 0.0 });
    let reversed = perfect.mapv(|v| 1.0 - v);
    let constant = Array2::from_elem((8, 3), 0.3);
    let auc = |s: &Array2<f64>| roc_auc(&y, s.view()).map(|c| c.macro_value).map_err(|e| e.to_string());
    let checks = [(auc(&perfect)?, 1.0, "perfect AUC"), (auc(&reversed)?, 0.0, "reversed AUC"), (auc(&constant)?, 0.5, "constant AUC")];
    for (got, want, what) in checks {
        if got != Some(want) {
            return Err(format!("{what} {got:?}, expected {want}"));
        }
    }
    let ap = pr_average_precision(&y, constant.view()).map_err(|e| e.to_string())?;
    for class in &ap.classes {
        let prevalence = y.iter().filter(|&&l| l == class.class).count() as f64 / y.len() as f64;
        if class.summary != Some(prevalence) {
            return Err(format!("class {} AP {:?} vs prevalence {prevalence}", class.class, class.summary));
        }
    }
    Ok("accuracy identity on 20 draws, AUC 1/0/0.5, AP = prevalence".into())
}

/// Demo corpus through the whole study, shared with criterion 12.
fn end_to_end(work: &Path) -> Result<String, String> {
    let demo = work.join("demo").to_string_lossy().into_owned();
    let run = work.join("run");
    emovox(&["demo-corpus", "--out-dir", &demo])?;
    let code = emovox(&["reproduce", "--root", &demo, "--stage", "all", "--out-dir", &run.to_string_lossy()])?;
    let m = read_json(&run.join("manifest.json"))?;
    let n_models = m["models"].as_array().map_or(0, |v| v.len());
    let n_searches = m["searches"].as_array().map_or(0, |v| v.len());
    let svm = test_accuracy(&m, 2, "svm_optimized")?;
    let mlp = test_accuracy(&m, 2, "mlp_optimized")?;
    let detail = format!(
        "{n_models} models, {n_searches} searches, optimized test accuracy svm {svm:.4} mlp {mlp:.4}, exit {code}"
    );
    if n_models == 15 && n_searches == 8 && svm >= 0.9 && mlp >= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_seconds"));
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn determinism(work: &Path) -> Result<String, String> {
    let run = work.join("run");
    let features = run.join("features.csv");
    let augmented = run.join("features_augmented.csv");
    if !features.is_file() {
        return Err("criterion 11 left no feature table to rerun".into());
    }
    let mut manifests = Vec::new();
    for (dir, jobs) in [("det_a", "1"), ("det_b", "4")] {
        let out = work.join(dir);
        emovox(&[
            "--jobs",
            jobs,
            "reproduce",
            "--features",
            &features.to_string_lossy(),
            "--augmented",
            &augmented.to_string_lossy(),
            "--stage",
            "2,3",
            "--out-dir",
            &out.to_string_lossy(),
        ])?;
        manifests.push(read_json(&out.join("manifest.json"))?);
    }
    let mut models = 0;
    for r in manifests[0]["models"].as_array().ok_or("no models")? {
        for a in r["artifacts"].as_array().ok_or("no artifacts")? {
            let a = a.as_str().ok_or("bad artifact")?;
            if a.ends_with("model.json") {
                let read = |d: &str| std::fs::read(work.join(d).join(a)).map_err(|e| format!("{a}: {e}"));
                if read("det_a")? != read("det_b")? {
                    return Err(format!("{a} differs between runs"));
                }
                models += 1;
            }
        }
    }
    for m in &mut manifests {
        strip_timings(m);
    }
    if manifests[0] != manifests[1] {
        return Err("manifests differ outside timing fields".into());
    }
    Ok(format!("stages 2 and 3 with 1 and 4 workers: manifests equal, {models} model files byte-identical"))
}

fn main() {
    let mut results: Vec<(u32, &'static str, Outcome)> = Vec::new();
    dataset_criteria(&mut results);

    let secs = Duration::from_secs;
    results.push((6, "DSP oracle within 1e-3", timed(secs(10), dsp_oracle)));
    results.push((7, "MLP gradient check below 1e-5", timed(secs(30), gradient_check)));
    results.push((8, "SVM QP, KKT and monotone objective", timed(secs(60), svm_correctness)));
    results.push((9, "SMOTE balance and convexity", timed(secs(5), smote_properties)));
    results.push((10, "metric identities and fixtures", timed(secs(5), metric_fixtures)));

    let work = tempfile::tempdir().expect("temp dir");
    results.push((11, "demo corpus end to end", timed(secs(600), || end_to_end(work.path()))));
    results.push((12, "deterministic manifests and models", timed(secs(600), || determinism(work.path()))));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {n:>2}: {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
