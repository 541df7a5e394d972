//! Mel spectrogram and MFCC against librosa references (`golden/`).

use std::path::PathBuf;

use emovox::features::{FeatureConfig, FeatureExtractor};
use emovox::ingest::read_wav;
use ndarray::Array2;
use serde_json::Value;

const MAX_RELATIVE_ERROR: f64 = 1e-3;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn matrix(v: &Value) -> Array2<f64> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).unwrap();
    let (r, c) = (rows.len(), rows[0].len());
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect()).unwrap()
}

/// Largest `|got − want| / |want|` over all entries. Entries whose
/// reference magnitude is below `1e-9` of the matrix peak are compared
/// against that floor instead, since a relative error of a value at the
/// float rounding level carries no information.
fn max_relative_error(got: &Array2<f64>, want: &Array2<f64>) -> f64 {
    assert_eq!(got.dim(), want.dim());
    let peak = want.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * peak;
    got.iter()
        .zip(want.iter())
        .map(|(g, w)| (g - w).abs() / w.abs().max(floor))
        .fold(0.0, f64::max)
}

#[test]
fn mel_and_mfcc_match_librosa() {
    let text = std::fs::read_to_string(golden_dir().join("golden.json")).unwrap();
    let golden: Value = serde_json::from_str(&text).unwrap();
    let config = FeatureConfig {
        n_fft: golden["n_fft"].as_u64().unwrap() as usize,
        hop: golden["hop"].as_u64().unwrap() as usize,
        n_mels: golden["n_mels"].as_u64().unwrap() as usize,
        n_mfcc: golden["n_mfcc"].as_u64().unwrap() as usize,
    };
    let sr = golden["sample_rate"].as_u64().unwrap() as u32;
    let extractor = FeatureExtractor::new(config, sr).unwrap();
    let clips = golden["clips"].as_array().unwrap();
    assert_eq!(clips.len(), 5);
    for clip in clips {
        let file = clip["file"].as_str().unwrap();
        let audio = read_wav(&golden_dir().join(file)).unwrap();
        let spec = extractor.spectrogram(&audio).unwrap();
        let mel = extractor.mel(&spec).unwrap();
        let mfcc = extractor.mfcc(&audio).unwrap();
        let mel_err = max_relative_error(&mel, &matrix(&clip["mel"]));
        let mfcc_err = max_relative_error(&mfcc, &matrix(&clip["mfcc"]));
        eprintln!("{file}: mel {mel_err:.3e}, mfcc {mfcc_err:.3e}");
        assert!(mel_err < MAX_RELATIVE_ERROR, "{file} mel error {mel_err}");
        assert!(mfcc_err < MAX_RELATIVE_ERROR, "{file} mfcc error {mfcc_err}");
    }
}
