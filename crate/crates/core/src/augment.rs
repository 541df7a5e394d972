//! Waveform augmentation: linear fade in/out and resampling pitch shift.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{resample_by_ratio, AudioClip, Corpus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentSpec {
    FadeInOut { fade_seconds: f64 },
    ChangeTone { tone_factor: f64 },
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AugmentSpec::FadeInOut { fade_seconds } if !(fade_seconds >= 0.0) => Err(
                Error::invalid(format!("fade_seconds {fade_seconds} must be ≥ 0")),
            ),
            AugmentSpec::ChangeTone { tone_factor } if !(tone_factor > 0.0 && tone_factor.is_finite()) => {
                Err(Error::invalid(format!("tone_factor {tone_factor} must be > 0")))
            }
            _ => Ok(()),
        }
    }

    /// Short tag appended to derived file names and source paths.
    pub fn tag(&self) -> String {
        match *self {
            AugmentSpec::FadeInOut { fade_seconds } => format!("fade{fade_seconds}"),
            AugmentSpec::ChangeTone { tone_factor } => format!("tone{tone_factor}"),
        }
    }

    pub fn apply(&self, clip: &AudioClip) -> Result<AudioClip> {
        match *self {
            AugmentSpec::FadeInOut { fade_seconds } => fade_in_out(clip, fade_seconds),
            AugmentSpec::ChangeTone { tone_factor } => change_tone(clip, tone_factor),
        }
    }

    /// One fade of 0.5 s and pitch shifts of 0.9 and 1.1.
    pub fn defaults() -> Vec<AugmentSpec> {
        vec![
            AugmentSpec::FadeInOut { fade_seconds: 0.5 },
            AugmentSpec::ChangeTone { tone_factor: 0.9 },
            AugmentSpec::ChangeTone { tone_factor: 1.1 },
        ]
    }
}

/// Multiply the first and last `round(fade_seconds·rate)` samples by linear
/// ramps 0→1 and 1→0.
pub fn fade_in_out(clip: &AudioClip, fade_seconds: f64) -> Result<AudioClip> {
    AugmentSpec::FadeInOut { fade_seconds }.validate()?;
    let n = (fade_seconds * clip.sample_rate() as f64).round() as usize;
    let len = clip.len();
    if 2 * n > len {
        return Err(Error::invalid(format!(
            "fade of {n} samples exceeds half of a {len}-sample clip"
        )));
    }
    let mut samples = clip.samples().to_vec();
    for i in 0..n {
        let gain = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        samples[i] *= gain;
        samples[len - 1 - i] *= gain;
    }
    AudioClip::new(samples, clip.sample_rate())
}

/// Pitch shift by resampling: every frequency scales by `tone_factor` and
/// the duration by its inverse. The sample rate label is unchanged.
pub fn change_tone(clip: &AudioClip, tone_factor: f64) -> Result<AudioClip> {
    AugmentSpec::ChangeTone { tone_factor }.validate()?;
    let samples = resample_by_ratio(clip.samples(), 1.0 / tone_factor);
    AudioClip::new(samples, clip.sample_rate())
}

/// Originals followed by one transformed copy per (clip, spec), clip-major.
///
/// Both transforms are deterministic; `seed` is accepted so randomized
/// transforms can be added without changing call sites, and currently does
/// not affect the output. Clips whose transform fails are skipped with a
/// warning.
pub fn augment_corpus(corpus: &Corpus, specs: &[AugmentSpec], _seed: u64) -> Result<Corpus> {
    if specs.is_empty() {
        return Err(Error::invalid("at least one augmentation spec is required"));
    }
    for s in specs {
        s.validate()?;
    }
    let copies: Vec<Vec<std::result::Result<_, String>>> = corpus
        .clips
        .par_iter()
        .map(|(clip, meta)| {
            specs
                .iter()
                .map(|spec| {
                    spec.apply(clip)
                        .map(|c| {
                            let mut m = meta.clone();
                            m.source_path = format!("{}#{}", meta.source_path, spec.tag());
                            (c, m)
                        })
                        .map_err(|e| format!("{} ({}): {e}", meta.source_path, spec.tag()))
                })
                .collect()
        })
        .collect();

    let mut out = Corpus {
        clips: corpus.clips.clone(),
        warnings: corpus.warnings.clone(),
    };
    for res in copies.into_iter().flatten() {
        match res {
            Ok(pair) => out.clips.push(pair),
            Err(msg) => {
                warn!("augmentation skipped: {msg}");
                out.warnings.push(msg);
            }
        }
    }
    Ok(out)
}
