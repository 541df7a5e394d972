use ndarray::{Array2, ArrayView2};

use super::estimator::{Estimator, Predictor};
use crate::error::Result;
use crate::ingest::{Emotion, VocalChannel};
use crate::preprocess::{LabelCodec, LabeledDataset, RowMeta};

pub fn toy_dataset(per_class: usize, n_classes: usize) -> LabeledDataset {
    let n = per_class * n_classes;
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let c = (i % n_classes) as f64;
        let jitter = ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5;
        c * 4.0 * if j == 0 { 1.0 } else { -0.5 } + jitter
    });
    let y: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    let meta = (0..n)
        .map(|i| RowMeta {
            path: format!("r{i}"),
            channel: VocalChannel::Speech,
            emotion: Emotion::Calm,
            actor: 1,
        })
        .collect();
    let codec = LabelCodec::from_classes((0..n_classes).map(|c| format!("c{c}")).collect()).unwrap();
    LabeledDataset::new(x, y, meta, codec).unwrap()
}

/// 1-nearest-neighbour memorizer.
pub struct Memorizer;
pub struct Memory(Array2<f64>, Vec<usize>);
impl Predictor for Memory {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(x.rows()
            .into_iter()
            .map(|r| {
                let (best, _) = self
                    .0
                    .rows()
                    .into_iter()
                    .enumerate()
                    .map(|(i, m)| (i, (&m - &r).mapv(|v| v * v).sum()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                self.1[best]
            })
            .collect())
    }
}
impl Estimator for Memorizer {
    type Model = Memory;
    fn fit(&self, x: ArrayView2<f64>, y: &[usize], _: usize) -> Result<Memory> {
        Ok(Memory(x.to_owned(), y.to_vec()))
    }
}

