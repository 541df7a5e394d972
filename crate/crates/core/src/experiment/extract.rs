use std::path::Path;

use log::warn;
use ndarray::Array2;
use rayon::prelude::*;

use crate::augment::AugmentSpec;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureExtractor};
use crate::ingest::{load_clip, write_wav, CorpusManifest, ManifestEntry, WavEncoding};
use crate::preprocess::RowMeta;

/// Feature rows in manifest order plus one message per skipped clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub x: Array2<f64>,
    pub meta: Vec<RowMeta>,
    pub warnings: Vec<String>,
}

/// Row identity of a manifest entry: its corpus-relative path, with
/// `#tag` appended for augmented copies.
pub fn row_meta(entry: &ManifestEntry) -> RowMeta {
    let mut meta = RowMeta::from(&entry.metadata);
    if let Some(tag) = &entry.augmentation {
        meta.path = format!("{}#{tag}", entry.metadata.source_path);
    }
    meta
}

/// The original clip a row was derived from.
pub fn base_path(path: &str) -> &str {
    path.split('#').next().unwrap_or(path)
}

fn collect(rows: Vec<Result<(RowMeta, Vec<f64>)>>, dim: usize, labels: Vec<String>) -> Result<FeatureTable> {
    let mut values = Vec::with_capacity(rows.len() * dim);
    let mut meta = Vec::with_capacity(rows.len());
    let mut warnings = Vec::new();
    for (res, label) in rows.into_iter().zip(labels) {
        match res {
            Ok((m, v)) => {
                values.extend_from_slice(&v);
                meta.push(m);
            }
            Err(e) => {
                warn!("feature extraction skipped {label}: {e}");
                warnings.push(format!("{label}: {e}"));
            }
        }
    }
    if meta.is_empty() {
        return Err(Error::invalid("no clip produced a feature vector"));
    }
    let x = Array2::from_shape_vec((meta.len(), dim), values).expect("row widths fixed");
    Ok(FeatureTable { x, meta, warnings })
}

/// One feature row per manifest entry. Clips that fail to load or extract
/// are skipped with a warning; audio is decoded one clip per worker at a
/// time, so memory stays bounded by the worker count.
pub fn extract_manifest(manifest: &CorpusManifest, config: FeatureConfig) -> Result<FeatureTable> {
    let extractor = FeatureExtractor::new(config, manifest.sample_rate)?;
    let dim = extractor.layout().dim();
    let rows: Vec<Result<(RowMeta, Vec<f64>)>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let clip = load_clip(&manifest.entry_path(entry), manifest.sample_rate)?;
            let fv = extractor.extract(&clip)?;
            Ok((row_meta(entry), fv.values))
        })
        .collect();
    let labels = manifest.entries.iter().map(|e| e.path.clone()).collect();
    collect(rows, dim, labels)
}

/// Feature rows of every augmented copy of every manifest entry, computed
/// in memory: entry-major, spec order within an entry.
pub fn extract_augmented(manifest: &CorpusManifest, config: FeatureConfig, specs: &[AugmentSpec]) -> Result<FeatureTable> {
    if specs.is_empty() {
        return Err(Error::invalid("at least one augmentation spec is required"));
    }
    for s in specs {
        s.validate()?;
    }
    let extractor = FeatureExtractor::new(config, manifest.sample_rate)?;
    let dim = extractor.layout().dim();
    let per_entry: Vec<Vec<Result<(RowMeta, Vec<f64>)>>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let clip = match load_clip(&manifest.entry_path(entry), manifest.sample_rate) {
                Ok(c) => c,
                Err(e) => return specs.iter().map(|_| Err(Error::invalid(e.to_string()))).collect(),
            };
            specs
                .iter()
                .map(|spec| {
                    let fv = extractor.extract(&spec.apply(&clip)?)?;
                    let mut tagged = entry.clone();
                    tagged.augmentation = Some(spec.tag());
                    Ok((row_meta(&tagged), fv.values))
                })
                .collect()
        })
        .collect();
    let labels = manifest
        .entries
        .iter()
        .flat_map(|e| specs.iter().map(move |s| format!("{}#{}", e.path, s.tag())))
        .collect();
    collect(per_entry.into_iter().flatten().collect(), dim, labels)
}

/// Write each augmented copy as a float WAV under `out_dir`, mirroring the
/// source layout, and return a manifest of the copies.
pub fn write_augmented_corpus(manifest: &CorpusManifest, specs: &[AugmentSpec], out_dir: &Path) -> Result<CorpusManifest> {
    if specs.is_empty() {
        return Err(Error::invalid("at least one augmentation spec is required"));
    }
    for s in specs {
        s.validate()?;
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results: Vec<Vec<Result<ManifestEntry>>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let clip = match load_clip(&manifest.entry_path(entry), manifest.sample_rate) {
                Ok(c) => c,
                Err(e) => return vec![Err(e)],
            };
            specs
                .iter()
                .map(|spec| {
                    let out = spec.apply(&clip)?;
                    let rel = Path::new(&entry.path);
                    let stem = rel.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    let rel_out = rel.with_file_name(format!("{stem}_{}.wav", spec.tag()));
                    let dest = out_dir.join(&rel_out);
                    if let Some(parent) = dest.parent() {
                        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                    }
                    write_wav(&dest, &out, WavEncoding::Float32)?;
                    Ok(ManifestEntry {
                        path: rel_out.to_string_lossy().into_owned(),
                        metadata: entry.metadata.clone(),
                        duration_seconds: out.duration_seconds(),
                        sample_count: out.len(),
                        augmentation: Some(spec.tag()),
                    })
                })
                .collect()
        })
        .collect();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for res in results.into_iter().flatten() {
        match res {
            Ok(e) => entries.push(e),
            Err(e) => {
                warn!("augmentation skipped: {e}");
                skipped.push(e.to_string());
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyCorpus(out_dir.to_path_buf()));
    }
    Ok(CorpusManifest {
        root: out_dir.to_string_lossy().into_owned(),
        sample_rate: manifest.sample_rate,
        entries,
        skipped,
    })
}
