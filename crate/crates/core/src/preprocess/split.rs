use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{class_counts, LabeledDataset};
use crate::error::{Error, Result};

/// Per-class test counts: rounded shares, nudged so they sum to
/// `round(n·fraction)` while every class keeps at least one training row.
pub fn stratified_test_counts(counts: &[usize], test_fraction: f64) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let target = (n as f64 * test_fraction).round() as usize;
    let ideal: Vec<f64> = counts.iter().map(|&c| c as f64 * test_fraction).collect();
    let mut alloc: Vec<usize> = counts
        .iter()
        .zip(&ideal)
        .map(|(&c, &f)| (f.round() as usize).min(c.saturating_sub(1)))
        .collect();

    loop {
        let total: usize = alloc.iter().sum();
        if total == target {
            break;
        }
        // Most under-allocated class when short, most over-allocated when long.
        let pick = if total < target {
            (0..counts.len())
                .filter(|&c| alloc[c] + 1 < counts[c])
                .max_by(|&a, &b| {
                    let da = ideal[a] - alloc[a] as f64;
                    let db = ideal[b] - alloc[b] as f64;
                    da.total_cmp(&db).then(b.cmp(&a))
                })
        } else {
            (0..counts.len()).filter(|&c| alloc[c] > 0).min_by(|&a, &b| {
                let da = ideal[a] - alloc[a] as f64;
                let db = ideal[b] - alloc[b] as f64;
                da.total_cmp(&db).then(a.cmp(&b))
            })
        };
        match pick {
            Some(c) if total < target => alloc[c] += 1,
            Some(c) => alloc[c] -= 1,
            None => break,
        }
    }
    alloc
}

/// Shuffle each class's row indices with one seeded stream, in class order.
pub(crate) fn shuffled_class_indices(y: &[usize], n_classes: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in y.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in &mut by_class {
        idx.shuffle(&mut rng);
    }
    by_class
}

/// Train and test row indices (each ascending) for a stratified split.
pub fn stratified_split_indices(
    y: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    let counts = class_counts(y, n_classes);
    for (class, &count) in counts.iter().enumerate() {
        if count > 0 && count < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count,
                needed: 2,
            });
        }
    }
    let test_counts = stratified_test_counts(&counts, test_fraction);
    let by_class = shuffled_class_indices(y, n_classes, seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (idx, &k) in by_class.iter().zip(&test_counts) {
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded stratified train/test split.
pub fn stratified_split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_split_indices(&ds.y, ds.n_classes(), test_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Seeded stratified subsample keeping `ceil(fraction·count)` rows of each
/// class present in `indices`, raised to `min(min_per_class, count)`.
pub fn stratified_subsample(
    indices: &[usize],
    y: &[usize],
    n_classes: usize,
    fraction: f64,
    min_per_class: usize,
    seed: u64,
) -> Vec<usize> {
    let local_y: Vec<usize> = indices.iter().map(|&i| y[i]).collect();
    let by_class = shuffled_class_indices(&local_y, n_classes, seed);
    let mut out: Vec<usize> = by_class
        .iter()
        .flat_map(|idx| {
            let keep = ((idx.len() as f64 * fraction).ceil() as usize)
                .max(min_per_class)
                .min(idx.len());
            idx[..keep].iter().map(|&j| indices[j])
        })
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_rows_two_classes() {
        let y = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let (train, test) = stratified_split_indices(&y, 2, 0.2, 3).unwrap();
        assert_eq!(test.len(), 2);
        assert_eq!(class_counts(&test.iter().map(|&i| y[i]).collect::<Vec<_>>(), 2), vec![1, 1]);
        assert_eq!(train.len(), 8);
    }

    #[test]
    fn half_split_of_four_and_four() {
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let (_, test) = stratified_split_indices(&y, 2, 0.5, 9).unwrap();
        let tc = class_counts(&test.iter().map(|&i| y[i]).collect::<Vec<_>>(), 2);
        assert_eq!(tc, vec![2, 2]);
    }

    #[test]
    fn seeded_and_rejects_singletons() {
        let y = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2];
        let a = stratified_split_indices(&y, 3, 0.25, 11).unwrap();
        let b = stratified_split_indices(&y, 3, 0.25, 11).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            stratified_split_indices(&[0, 0, 1], 2, 0.2, 0),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
        assert!(stratified_split_indices(&y, 3, 1.0, 0).is_err());
    }

    #[test]
    fn subsample_keeps_every_class() {
        let y = vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 2];
        let idx: Vec<usize> = (0..12).collect();
        let counts = |sub: &[usize]| class_counts(&sub.iter().map(|&i| y[i]).collect::<Vec<_>>(), 3);
        assert_eq!(counts(&stratified_subsample(&idx, &y, 3, 0.1, 1, 1)), vec![1, 1, 1]);
        assert_eq!(counts(&stratified_subsample(&idx, &y, 3, 0.1, 2, 1)), vec![2, 2, 1]);
        assert_eq!(counts(&stratified_subsample(&idx, &y, 3, 0.5, 2, 1)), vec![5, 2, 1]);
    }

    proptest! {
        #[test]
        fn split_partitions_and_stays_within_one(
            counts in proptest::collection::vec(2usize..40, 1..7),
            frac in 0.05f64..0.5,
            seed in any::<u64>(),
        ) {
            let y: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat(c).take(n)).collect();
            let (train, test) = stratified_split_indices(&y, counts.len(), frac, seed).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            let tc = class_counts(&test.iter().map(|&i| y[i]).collect::<Vec<_>>(), counts.len());
            for (c, &n) in counts.iter().enumerate() {
                prop_assert!((tc[c] as f64 - n as f64 * frac).abs() <= 1.0);
                prop_assert!(tc[c] < n);
            }
        }
    }
}
