use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::smo::{solve_dual, SmoOptions, SUPPORT_EPS};
use crate::error::{Error, Result};

/// One binary sub-problem: `class_a` is the positive side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseModel {
    pub class_a: usize,
    pub class_b: usize,
    /// Rows of the shared support-vector pool used by this pair.
    pub sv_indices: Vec<usize>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
}

/// One-vs-one multiclass SVM. Support vectors are pooled across pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmMulticlassModel {
    pub n_classes: usize,
    pub kernel: KernelSpec,
    pub c: f64,
    pub support_vectors: Array2<f64>,
    pub pairs: Vec<PairwiseModel>,
}

impl SvmMulticlassModel {
    pub fn n_features(&self) -> usize {
        self.support_vectors.ncols()
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    /// Decision value of every pair for every row (rows × pairs).
    pub fn pairwise_decisions(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        let k = self.kernel.matrix(x, self.support_vectors.view());
        let mut out = Array2::zeros((x.nrows(), self.pairs.len()));
        for (p, pair) in self.pairs.iter().enumerate() {
            for r in 0..x.nrows() {
                let krow = k.row(r);
                let s: f64 = pair
                    .sv_indices
                    .iter()
                    .zip(&pair.dual_coefs)
                    .map(|(&i, &a)| a * krow[i])
                    .sum();
                out[[r, p]] = s + pair.bias;
            }
        }
        Ok(out)
    }

    /// Voted labels plus per-class scores (rows × classes).
    pub fn predict_with_scores(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        let dec = self.pairwise_decisions(x)?;
        let pairs: Vec<(usize, usize)> = self.pairs.iter().map(|p| (p.class_a, p.class_b)).collect();
        let mut labels = Vec::with_capacity(x.nrows());
        let mut scores = Array2::zeros((x.nrows(), self.n_classes));
        for (r, row) in dec.axis_iter(Axis(0)).enumerate() {
            let (label, s) = vote(self.n_classes, &pairs, row.as_slice().expect("contiguous"));
            labels.push(label);
            scores.row_mut(r).assign(&ndarray::ArrayView1::from(&s));
        }
        Ok((labels, scores))
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(self.predict_with_scores(x)?.0)
    }
}

/// Combine pairwise decisions: most votes wins, then the larger summed
/// signed decision value, then the lower class index. The score of a class
/// is the sum of the decision values oriented toward it.
pub fn vote(n_classes: usize, pairs: &[(usize, usize)], decisions: &[f64]) -> (usize, Vec<f64>) {
    let mut votes = vec![0usize; n_classes];
    let mut scores = vec![0.0; n_classes];
    for (&(a, b), &d) in pairs.iter().zip(decisions) {
        if d > 0.0 {
            votes[a] += 1;
        } else {
            votes[b] += 1;
        }
        scores[a] += d;
        scores[b] -= d;
    }
    let mut best = 0;
    for c in 1..n_classes {
        let better = votes[c] > votes[best] || (votes[c] == votes[best] && scores[c] > scores[best]);
        if better {
            best = c;
        }
    }
    (best, scores)
}

/// Train one binary SVM per unordered class pair on that pair's rows.
pub fn train_multiclass(
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
    c: f64,
    kernel: &KernelSpec,
    opts: &SmoOptions,
) -> Result<SvmMulticlassModel> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if n_classes < 2 {
        return Err(Error::invalid("multiclass SVM needs at least 2 classes"));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange { label: bad, n_classes });
    }
    let class_pairs: Vec<(usize, usize)> = (0..n_classes)
        .flat_map(|a| (a + 1..n_classes).map(move |b| (a, b)))
        .collect();

    let solved: Vec<(usize, usize, Vec<usize>, Vec<f64>, f64, bool)> = class_pairs
        .par_iter()
        .map(|&(a, b)| {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == a || y[i] == b).collect();
            let sub = x.select(Axis(0), &rows);
            let signs: Vec<f64> = rows.iter().map(|&i| if y[i] == a { 1.0 } else { -1.0 }).collect();
            let sol = solve_dual(sub.view(), &signs, c, kernel, opts)
                .map_err(|e| Error::invalid(format!("classes {a} vs {b}: {e}")))?;
            let (svs, coefs): (Vec<usize>, Vec<f64>) = (0..rows.len())
                .filter(|&k| sol.alpha[k] > SUPPORT_EPS)
                .map(|k| (rows[k], sol.alpha[k] * signs[k]))
                .unzip();
            Ok((a, b, svs, coefs, sol.bias, sol.converged))
        })
        .collect::<Result<_>>()?;

    // Pool: every training row that is a support vector of some pair.
    let mut used = vec![false; y.len()];
    for (_, _, svs, ..) in &solved {
        for &i in svs {
            used[i] = true;
        }
    }
    let pool_rows: Vec<usize> = (0..y.len()).filter(|&i| used[i]).collect();
    let mut pool_index = vec![usize::MAX; y.len()];
    for (p, &i) in pool_rows.iter().enumerate() {
        pool_index[i] = p;
    }
    let pairs = solved
        .into_iter()
        .map(|(a, b, svs, coefs, bias, converged)| PairwiseModel {
            class_a: a,
            class_b: b,
            sv_indices: svs.iter().map(|&i| pool_index[i]).collect(),
            dual_coefs: coefs,
            bias,
            converged,
        })
        .collect();
    Ok(SvmMulticlassModel {
        n_classes,
        kernel: *kernel,
        c,
        support_vectors: x.select(Axis(0), &pool_rows),
        pairs,
    })
}
