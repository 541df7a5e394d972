use crate::error::{Error, Result};
use crate::preprocess::{class_counts, shuffled_class_indices};

/// Seeded stratified k-fold partition. Each class's shuffled rows are dealt
/// round-robin across folds, continuing where the previous class stopped so
/// that fold sizes stay balanced too. Every fold is returned ascending.
pub fn stratified_kfold(y: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("k-fold needs k ≥ 2, got {k}")));
    }
    for (class, &count) in class_counts(y, n_classes).iter().enumerate() {
        if count > 0 && count < k {
            return Err(Error::ClassTooSmall {
                class,
                count,
                needed: k,
            });
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for idx in shuffled_class_indices(y, n_classes, seed) {
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Every index outside fold `f`, ascending.
pub fn fold_complement(folds: &[Vec<usize>], f: usize) -> Vec<usize> {
    let mut out: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(g, _)| g != f)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect();
    out.sort_unstable();
    out
}
