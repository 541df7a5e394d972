use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::labels::{encode_labels, LabelCodec};
use crate::error::{Error, Result};
use crate::ingest::{ClipMetadata, Emotion, VocalChannel};

/// Identity carried alongside each feature row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub path: String,
    pub channel: VocalChannel,
    pub emotion: Emotion,
    pub actor: u8,
}

impl From<&ClipMetadata> for RowMeta {
    fn from(m: &ClipMetadata) -> Self {
        RowMeta {
            path: m.source_path.clone(),
            channel: m.vocal_channel,
            emotion: m.emotion,
            actor: m.actor,
        }
    }
}

/// Feature matrix with integer labels and aligned row metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub meta: Vec<RowMeta>,
    pub codec: LabelCodec,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, y: Vec<usize>, meta: Vec<RowMeta>, codec: LabelCodec) -> Result<Self> {
        if x.nrows() != y.len() || y.len() != meta.len() {
            return Err(Error::invalid(format!(
                "misaligned dataset: {} rows, {} labels, {} metadata",
                x.nrows(),
                y.len(),
                meta.len()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&l| l >= codec.len()) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                n_classes: codec.len(),
            });
        }
        Ok(LabeledDataset { x, y, meta, codec })
    }

    /// Label rows by emotion name, encoding classes lexicographically.
    pub fn from_rows(x: Array2<f64>, meta: Vec<RowMeta>) -> Result<Self> {
        let names: Vec<&str> = meta.iter().map(|m| m.emotion.name()).collect();
        let (codec, y) = encode_labels(&names)?;
        Self::new(x, y, meta, codec)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.codec.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.y, self.n_classes())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select(ndarray::Axis(0), indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            meta: indices.iter().map(|&i| self.meta[i].clone()).collect(),
            codec: self.codec.clone(),
        }
    }

    /// Rows whose metadata satisfies `keep`, re-encoded so unused classes
    /// disappear from the codec.
    pub fn filter(&self, keep: impl Fn(&RowMeta) -> bool) -> Result<LabeledDataset> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(&self.meta[i])).collect();
        if idx.is_empty() {
            return Err(Error::invalid("filter removed every row"));
        }
        let sub = self.subset(&idx);
        let names: Vec<&str> = sub.y.iter().map(|&c| self.codec.decode(c)).collect::<Result<_>>()?;
        let (codec, y) = encode_labels(&names)?;
        LabeledDataset::new(sub.x, y, sub.meta, codec)
    }

    /// Stack `other` below `self`; both must share codec and width.
    pub fn concat(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        if self.codec != other.codec {
            return Err(Error::invalid("cannot concatenate datasets with different label codecs"));
        }
        if self.n_features() != other.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: other.n_features(),
            });
        }
        let x = ndarray::concatenate(ndarray::Axis(0), &[self.x.view(), other.x.view()])
            .expect("widths checked");
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        let mut meta = self.meta.clone();
        meta.extend_from_slice(&other.meta);
        LabeledDataset::new(x, y, meta, self.codec.clone())
    }

    pub fn with_x(&self, x: Array2<f64>) -> Result<LabeledDataset> {
        LabeledDataset::new(x, self.y.clone(), self.meta.clone(), self.codec.clone())
    }
}

pub fn class_counts(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &l in y {
        counts[l] += 1;
    }
    counts
}

pub fn feature_column_name(j: usize) -> String {
    format!("f{j:03}")
}

const META_COLUMNS: [&str; 4] = ["path", "channel", "emotion", "actor"];

/// Write rows as `path,channel,emotion,actor,f000..` with shortest
/// round-trip float formatting.
pub fn write_feature_csv(path: &Path, x: &Array2<f64>, meta: &[RowMeta]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..x.ncols()).map(feature_column_name));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (row, m) in x.rows().into_iter().zip(meta) {
        let mut rec = vec![
            m.path.clone(),
            m.channel.to_string(),
            m.emotion.to_string(),
            m.actor.to_string(),
        ];
        rec.extend(row.iter().map(|v| format_float(*v)));
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Read a feature table written by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<(Array2<f64>, Vec<RowMeta>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.len() < META_COLUMNS.len() + 1
        || header.iter().take(4).ne(META_COLUMNS.iter().copied())
    {
        return Err(Error::Schema(format!(
            "{}: header must start with {}",
            path.display(),
            META_COLUMNS.join(",")
        )));
    }
    let dim = header.len() - META_COLUMNS.len();
    for (j, name) in header.iter().skip(4).enumerate() {
        if name != feature_column_name(j) {
            return Err(Error::Schema(format!(
                "{}: column {} should be {}, found {name}",
                path.display(),
                j + 4,
                feature_column_name(j)
            )));
        }
    }
    let mut values = Vec::new();
    let mut meta = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| Error::Schema(format!("{} row {}: bad {what}", path.display(), line + 1));
        meta.push(RowMeta {
            path: rec[0].to_string(),
            channel: rec[1].parse().map_err(|_| bad("channel"))?,
            emotion: rec[2].parse().map_err(|_| bad("emotion"))?,
            actor: rec[3].parse().map_err(|_| bad("actor"))?,
        });
        for field in rec.iter().skip(4) {
            values.push(field.parse::<f64>().map_err(|_| bad("feature value"))?);
        }
    }
    let x = Array2::from_shape_vec((meta.len(), dim), values)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    Ok((x, meta))
}

pub(crate) fn euclidean_sq(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum()
}
