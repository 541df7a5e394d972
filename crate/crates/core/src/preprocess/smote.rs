use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{euclidean_sq, LabeledDataset};
use crate::error::{Error, Result};

/// Suffix marking synthetic rows in `RowMeta::path`.
pub const SMOTE_TAG: &str = "#smote";

/// The `k` nearest same-set neighbours of each row in `rows`, by Euclidean
/// distance with ties going to the lower row index.
fn nearest_neighbors(x: &Array2<f64>, rows: &[usize], k: usize) -> Vec<Vec<usize>> {
    rows.par_iter()
        .map(|&i| {
            let mut d: Vec<(f64, usize)> = rows
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (euclidean_sq(x.row(i), x.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Oversample every class up to the majority count with SMOTE.
///
/// Each synthetic row is `x + u·(nn − x)` for a random row `x` of the class,
/// one of its `min(k, count−1)` nearest same-class neighbours `nn` and
/// `u ~ U(0, 1)`. Originals come first, then synthetic rows by class.
pub fn smote(ds: &LabeledDataset, k: usize, seed: u64) -> Result<LabeledDataset> {
    if k == 0 {
        return Err(Error::invalid("SMOTE needs k ≥ 1"));
    }
    let counts = ds.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count == 1 {
            return Err(Error::ClassTooSmall {
                class,
                count,
                needed: 2,
            });
        }
    }
    let majority = counts.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_rows: Vec<f64> = Vec::new();
    let mut new_y = Vec::new();
    let mut new_meta = Vec::new();

    for (class, &count) in counts.iter().enumerate() {
        if count == 0 || count == majority {
            continue;
        }
        let rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.y[i] == class).collect();
        let k_eff = k.min(count - 1);
        let neighbors = nearest_neighbors(&ds.x, &rows, k_eff);
        for _ in 0..majority - count {
            let pos = rng.random_range(0..rows.len());
            let nn = neighbors[pos][rng.random_range(0..k_eff)];
            let u: f64 = rng.random();
            let base = ds.x.row(rows[pos]);
            let other = ds.x.row(nn);
            new_rows.extend(base.iter().zip(other.iter()).map(|(a, b)| a + u * (b - a)));
            new_y.push(class);
            let mut meta = ds.meta[rows[pos]].clone();
            meta.path.push_str(SMOTE_TAG);
            new_meta.push(meta);
        }
    }
    if new_y.is_empty() {
        return Ok(ds.clone());
    }
    let synth = Array2::from_shape_vec((new_y.len(), ds.n_features()), new_rows)
        .expect("row width is n_features");
    let x = ndarray::concatenate(Axis(0), &[ds.x.view(), synth.view()]).expect("same width");
    let mut y = ds.y.clone();
    y.extend(new_y);
    let mut meta = ds.meta.clone();
    meta.extend(new_meta);
    LabeledDataset::new(x, y, meta, ds.codec.clone())
}
