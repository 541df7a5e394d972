use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    Pr,
}

/// One point of a threshold sweep. For ROC `x` is the false-positive rate
/// and `y` the true-positive rate; for PR `x` is recall and `y` precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Scores at or above this are predicted positive; `None` for the
    /// sweep's starting point.
    pub threshold: Option<f64>,
}

/// One-vs-rest curve of one class, with its AUC or average precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCurve {
    pub class: usize,
    pub points: Vec<CurvePoint>,
    /// `None` when the class has no positive or no negative rows.
    pub summary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub kind: CurveKind,
    pub classes: Vec<ClassCurve>,
    /// Unweighted mean over classes with a defined summary.
    pub macro_value: Option<f64>,
    pub notes: Vec<String>,
}

/// Cumulative (threshold, tp, fp) after each group of tied scores, in
/// decreasing score order.
fn sweep(scores: impl Iterator<Item = f64>, positive: &[bool]) -> Vec<(f64, u64, u64)> {
    let mut order: Vec<(f64, bool)> = scores.zip(positive.iter().copied()).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (k, &(s, pos)) in order.iter().enumerate() {
        if pos {
            tp += 1;
        } else {
            fp += 1;
        }
        if k + 1 == order.len() || order[k + 1].0 != s {
            out.push((s, tp, fp));
        }
    }
    out
}

fn check_inputs(y_true: &[usize], scores: ArrayView2<f64>) -> Result<()> {
    if scores.nrows() != y_true.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: scores.nrows(),
        });
    }
    if let Some(&bad) = y_true.iter().find(|&&l| l >= scores.ncols()) {
        return Err(Error::LabelOutOfRange {
            label: bad,
            n_classes: scores.ncols(),
        });
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("curve scores must be finite"));
    }
    Ok(())
}

fn build(kind: CurveKind, y_true: &[usize], scores: ArrayView2<f64>) -> Result<CurveSet> {
    check_inputs(y_true, scores)?;
    let mut notes = Vec::new();
    let classes: Vec<ClassCurve> = (0..scores.ncols())
        .map(|c| {
            let positive: Vec<bool> = y_true.iter().map(|&t| t == c).collect();
            let p = positive.iter().filter(|&&b| b).count() as u64;
            let n = positive.len() as u64 - p;
            let defined = match kind {
                CurveKind::Roc => p > 0 && n > 0,
                CurveKind::Pr => p > 0,
            };
            if !defined {
                notes.push(format!(
                    "class {c}: {} undefined without both positive and negative rows; excluded from macro",
                    if kind == CurveKind::Roc { "AUC" } else { "average precision" }
                ));
                return ClassCurve {
                    class: c,
                    points: Vec::new(),
                    summary: None,
                };
            }
            let steps = sweep(scores.column(c).iter().copied(), &positive);
            match kind {
                CurveKind::Roc => {
                    let mut points = vec![CurvePoint {
                        x: 0.0,
                        y: 0.0,
                        threshold: None,
                    }];
                    let mut auc = 0.0;
                    for &(s, tp, fp) in &steps {
                        let pt = CurvePoint {
                            x: fp as f64 / n as f64,
                            y: tp as f64 / p as f64,
                            threshold: Some(s),
                        };
                        let prev = points.last().expect("starts non-empty");
                        auc += (pt.x - prev.x) * (pt.y + prev.y) / 2.0;
                        points.push(pt);
                    }
                    ClassCurve {
                        class: c,
                        points,
                        summary: Some(auc),
                    }
                }
                CurveKind::Pr => {
                    let mut points = vec![CurvePoint {
                        x: 0.0,
                        y: 1.0,
                        threshold: None,
                    }];
                    let mut ap = 0.0;
                    let mut prev_recall = 0.0;
                    for &(s, tp, fp) in &steps {
                        let recall = tp as f64 / p as f64;
                        let precision = tp as f64 / (tp + fp) as f64;
                        ap += (recall - prev_recall) * precision;
                        prev_recall = recall;
                        points.push(CurvePoint {
                            x: recall,
                            y: precision,
                            threshold: Some(s),
                        });
                    }
                    ClassCurve {
                        class: c,
                        points,
                        summary: Some(ap),
                    }
                }
            }
        })
        .collect();
    let defined: Vec<f64> = classes.iter().filter_map(|c| c.summary).collect();
    let macro_value = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(CurveSet {
        kind,
        classes,
        macro_value,
        notes,
    })
}

/// One-vs-rest ROC per class from a threshold sweep over the distinct
/// scores, with tied scores stepping together and trapezoidal AUC.
pub fn roc_auc(y_true: &[usize], scores: ArrayView2<f64>) -> Result<CurveSet> {
    build(CurveKind::Roc, y_true, scores)
}

/// One-vs-rest precision-recall per class over the same sweep, with
/// `AP = Σ (R_i − R_{i−1})·P_i`.
pub fn pr_average_precision(y_true: &[usize], scores: ArrayView2<f64>) -> Result<CurveSet> {
    build(CurveKind::Pr, y_true, scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_hot_scores(y: &[usize], k: usize, sign: f64) -> Array2<f64> {
        Array2::from_shape_fn((y.len(), k), |(i, c)| if y[i] == c { sign } else { 0.0 })
    }

    #[test]
    fn perfect_ranking() {
        let y = [0, 1, 2, 0, 1, 2, 2];
        let s = one_hot_scores(&y, 3, 1.0);
        let roc = roc_auc(&y, s.view()).unwrap();
        assert!(roc.classes.iter().all(|c| c.summary == Some(1.0)));
        assert_eq!(roc.macro_value, Some(1.0));
        let pr = pr_average_precision(&y, s.view()).unwrap();
        assert!(pr.classes.iter().all(|c| c.summary == Some(1.0)));
    }

    #[test]
    fn reversed_ranking() {
        let y = [0, 1, 2, 0, 1, 2];
        let roc = roc_auc(&y, one_hot_scores(&y, 3, -1.0).view()).unwrap();
        assert!(roc.classes.iter().all(|c| c.summary == Some(0.0)));
    }

    #[test]
    fn constant_scores() {
        let y = [0, 0, 0, 1, 2, 2, 2, 2];
        let s = Array2::from_elem((8, 3), 0.25);
        let roc = roc_auc(&y, s.view()).unwrap();
        assert!(roc.classes.iter().all(|c| c.summary == Some(0.5)));
        let pr = pr_average_precision(&y, s.view()).unwrap();
        let prevalence = [3.0 / 8.0, 1.0 / 8.0, 4.0 / 8.0];
        for (c, want) in pr.classes.iter().zip(prevalence) {
            assert_eq!(c.summary, Some(want));
        }
    }

    #[test]
    fn roc_runs_from_origin_to_one_one_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<usize> = (0..200).map(|_| rng.random_range(0..4)).collect();
        let s = Array2::from_shape_fn((200, 4), |_| (rng.random_range(0..20) as f64) / 4.0);
        let roc = roc_auc(&y, s.view()).unwrap();
        for c in &roc.classes {
            let first = c.points.first().unwrap();
            let last = c.points.last().unwrap();
            assert_eq!((first.x, first.y), (0.0, 0.0));
            assert_eq!((last.x, last.y), (1.0, 1.0));
            assert!(c.points.windows(2).all(|w| w[1].x >= w[0].x && w[1].y >= w[0].y));
            assert!((0.0..=1.0).contains(&c.summary.unwrap()));
        }
    }

    #[test]
    fn average_precision_is_rank_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<usize> = (0..300).map(|_| rng.random_range(0..3)).collect();
        let s = Array2::from_shape_fn((300, 3), |_| rng.random_range(-1.0..1.0));
        let t = s.mapv(|v: f64| (3.0 * v).exp() + 7.0);
        let a = pr_average_precision(&y, s.view()).unwrap();
        let b = pr_average_precision(&y, t.view()).unwrap();
        for (ca, cb) in a.classes.iter().zip(&b.classes) {
            assert!((ca.summary.unwrap() - cb.summary.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn shuffled_labels_give_chance_auc() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let mut y: Vec<usize> = (0..n).map(|i| i % 6).collect();
        let s = one_hot_scores(&y, 6, 1.0) + Array2::from_shape_fn((n, 6), |_| rng.random_range(0.0..0.5));
        y.shuffle(&mut rng);
        let m = roc_auc(&y, s.view()).unwrap().macro_value.unwrap();
        assert!((0.4..=0.6).contains(&m), "{m}");
    }

    #[test]
    fn absent_class_is_excluded_with_note() {
        let y = [0, 0, 1, 1];
        let s = Array2::from_shape_fn((4, 3), |(i, c)| if y[i] == c { 1.0 } else { 0.0 });
        let roc = roc_auc(&y, s.view()).unwrap();
        assert_eq!(roc.classes[2].summary, None);
        assert_eq!(roc.macro_value, Some(1.0));
        assert_eq!(roc.notes.len(), 1);
    }

    #[test]
    fn shape_errors() {
        let s = Array2::zeros((3, 2));
        assert!(roc_auc(&[0, 1], s.view()).is_err());
        assert!(roc_auc(&[0, 1, 2], s.view()).is_err());
    }
}
