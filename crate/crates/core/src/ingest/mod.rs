//! Audio ingest: WAV decoding, resampling, RAVDESS metadata and corpus
//! assembly.

mod metadata;
mod resample;
mod wav;

use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};

pub use metadata::{
    parse_ravdess_filename, ClipMetadata, Emotion, Gender, Intensity, Modality, VocalChannel,
};
pub use resample::{resample, resample_by_ratio};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav, WavEncoding};

/// Analysis sample rate used by all feature extraction defaults.
pub const DEFAULT_SAMPLE_RATE: u32 = 22050;

/// Mono PCM audio with amplitudes nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("clip has no samples"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("clip contains non-finite samples"));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Decoded clips with their parsed metadata, in lexicographic path order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub clips: Vec<(AudioClip, ClipMetadata)>,
    /// One message per file that was skipped.
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }
}

/// One row of `corpus.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub metadata: ClipMetadata,
    pub duration_seconds: f64,
    /// Sample count at the manifest's analysis rate.
    pub sample_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    /// Directory the entry paths are relative to.
    #[serde(default)]
    pub root: String,
    pub sample_rate: u32,
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub skipped: Vec<String>,
}

impl CorpusManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Location of an entry on disk.
    pub fn entry_path(&self, entry: &ManifestEntry) -> PathBuf {
        Path::new(&self.root).join(&entry.path)
    }
}

/// Load one manifest entry at the given analysis rate.
pub fn load_clip(path: &Path, sample_rate: u32) -> Result<AudioClip> {
    let clip = read_wav(path)?;
    resample(&clip, sample_rate)
}

/// Walk `root` for RAVDESS-named WAV files, keeping the analysed emotions
/// and the requested channel. Unparseable names are reported, not fatal.
fn candidate_files(
    root: &Path,
    channel_filter: Option<VocalChannel>,
) -> Result<(Vec<(PathBuf, ClipMetadata)>, Vec<String>)> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut warnings = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        match entry {
            Ok(e) if e.file_type().is_file() => {
                let is_wav = e
                    .path()
                    .extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
                if is_wav {
                    paths.push(e.into_path());
                }
            }
            Ok(_) => {}
            Err(e) => warnings.push(format!("walk: {e}")),
        }
    }
    paths.sort();

    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let rel = path.strip_prefix(root).unwrap_or(&path);
        let name = rel.to_string_lossy().into_owned();
        match parse_ravdess_filename(&name) {
            Ok(meta) => {
                if meta.emotion.is_dropped() {
                    continue;
                }
                if channel_filter.is_some_and(|c| c != meta.vocal_channel) {
                    continue;
                }
                out.push((path, meta));
            }
            Err(e) => warnings.push(e.to_string()),
        }
    }
    Ok((out, warnings))
}

fn log_skips(warnings: &[String]) {
    for w in warnings {
        warn!("skipped: {w}");
    }
    if !warnings.is_empty() {
        warn!("{} file(s) skipped", warnings.len());
    }
}

/// Decode, resample and filter every clip under `root`.
///
/// Disgust and surprised clips are dropped; unreadable files are skipped
/// with a warning. Returns [`Error::EmptyCorpus`] when nothing survives.
pub fn load_corpus(
    root: &Path,
    channel_filter: Option<VocalChannel>,
    sample_rate: u32,
) -> Result<Corpus> {
    let (files, mut warnings) = candidate_files(root, channel_filter)?;
    let decoded: Vec<_> = files
        .into_par_iter()
        .map(|(path, meta)| (load_clip(&path, sample_rate), path, meta))
        .collect();
    let mut clips = Vec::with_capacity(decoded.len());
    for (res, path, meta) in decoded {
        match res {
            Ok(clip) => clips.push((clip, meta)),
            Err(e) => warnings.push(format!("{}: {e}", path.display())),
        }
    }
    log_skips(&warnings);
    if clips.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    Ok(Corpus { clips, warnings })
}

/// Build a manifest for `root` without keeping decoded audio in memory.
pub fn scan_corpus(
    root: &Path,
    channel_filter: Option<VocalChannel>,
    sample_rate: u32,
) -> Result<CorpusManifest> {
    let (files, mut warnings) = candidate_files(root, channel_filter)?;
    let decoded: Vec<_> = files
        .into_par_iter()
        .map(|(path, meta)| {
            let res = read_wav(&path).map(|clip| {
                let ratio = sample_rate as f64 / clip.sample_rate() as f64;
                let count = ((clip.len() as f64 * ratio).round() as usize).max(1);
                (clip.duration_seconds(), count)
            });
            (res, path, meta)
        })
        .collect();
    let mut entries = Vec::with_capacity(decoded.len());
    for (res, path, metadata) in decoded {
        match res {
            Ok((duration_seconds, sample_count)) => entries.push(ManifestEntry {
                path: path
                    .strip_prefix(root)
                    .unwrap_or(&path)
                    .to_string_lossy()
                    .into_owned(),
                metadata,
                duration_seconds,
                sample_count,
                augmentation: None,
            }),
            Err(e) => warnings.push(format!("{}: {e}", path.display())),
        }
    }
    log_skips(&warnings);
    if entries.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    Ok(CorpusManifest {
        root: root.to_string_lossy().into_owned(),
        sample_rate,
        entries,
        skipped: warnings,
    })
}
