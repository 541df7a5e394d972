use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::curves::{pr_average_precision, roc_auc, CurveSet};
use super::metrics::{class_prediction_error, class_report, confusion_matrix, ClassReport, ConfusionMatrix, PredictionErrorRow};
use super::svg;
use crate::error::{Error, Result};
use crate::model_select::LearningPoint;
use crate::preprocess::format_float;

/// Everything needed to evaluate one model on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub title: String,
    pub class_names: Vec<String>,
    pub y_true: Vec<usize>,
    pub y_pred: Vec<usize>,
    /// Per-class scores, rows aligned with `y_true`.
    pub scores: Array2<f64>,
    pub learning_curve: Option<Vec<LearningPoint>>,
    pub cv_scores: Option<Vec<f64>>,
}

/// Computed metrics and curves for one bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub title: String,
    pub class_names: Vec<String>,
    pub n_samples: usize,
    pub confusion: ConfusionMatrix,
    pub report: ClassReport,
    pub prediction_error: Vec<PredictionErrorRow>,
    pub roc: CurveSet,
    pub pr: CurveSet,
    pub learning_curve: Option<Vec<LearningPoint>>,
    pub cv_scores: Option<Vec<f64>>,
}

/// Scalars written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub title: String,
    pub n_samples: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub macro_auc: Option<f64>,
    pub macro_average_precision: Option<f64>,
    pub cv_mean: Option<f64>,
    pub cv_std: Option<f64>,
    pub zero_division: usize,
    pub classes: Vec<ClassSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub auc: Option<f64>,
    pub average_precision: Option<f64>,
}

pub fn evaluate(bundle: &ReportBundle) -> Result<EvalReport> {
    let k = bundle.class_names.len();
    if bundle.scores.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: bundle.scores.ncols(),
        });
    }
    let confusion = confusion_matrix(&bundle.y_true, &bundle.y_pred, k)?;
    Ok(EvalReport {
        title: bundle.title.clone(),
        class_names: bundle.class_names.clone(),
        n_samples: bundle.y_true.len(),
        report: class_report(&confusion),
        prediction_error: class_prediction_error(&confusion),
        roc: roc_auc(&bundle.y_true, bundle.scores.view())?,
        pr: pr_average_precision(&bundle.y_true, bundle.scores.view())?,
        confusion,
        learning_curve: bundle.learning_curve.clone(),
        cv_scores: bundle.cv_scores.clone(),
    })
}

impl EvalReport {
    pub fn cv_mean(&self) -> Option<f64> {
        self.cv_scores
            .as_ref()
            .filter(|s| !s.is_empty())
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
    }

    pub fn summary(&self) -> ReportSummary {
        let cv_std = self.cv_scores.as_ref().zip(self.cv_mean()).map(|(s, m)| {
            (s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64).sqrt()
        });
        ReportSummary {
            title: self.title.clone(),
            n_samples: self.n_samples,
            accuracy: self.report.accuracy,
            macro_precision: self.report.macro_precision,
            macro_recall: self.report.macro_recall,
            macro_f1: self.report.macro_f1,
            macro_auc: self.roc.macro_value,
            macro_average_precision: self.pr.macro_value,
            cv_mean: self.cv_mean(),
            cv_std,
            zero_division: self.report.zero_division,
            classes: self
                .class_names
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    let m = &self.report.per_class[c];
                    ClassSummary {
                        name: name.clone(),
                        precision: m.precision,
                        recall: m.recall,
                        f1: m.f1,
                        support: m.support,
                        auc: self.roc.classes[c].summary,
                        average_precision: self.pr.classes[c].summary,
                    }
                })
                .collect(),
            notes: self.roc.notes.iter().chain(&self.pr.notes).cloned().collect(),
        }
    }
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn curve_rows(set: &CurveSet, class: usize) -> Vec<Vec<String>> {
    set.classes[class]
        .points
        .iter()
        .map(|p| {
            vec![
                format_float(p.x),
                format_float(p.y),
                p.threshold.map(format_float).unwrap_or_default(),
            ]
        })
        .collect()
}

fn curve_series(set: &CurveSet, names: &[String]) -> Vec<svg::Series> {
    set.classes
        .iter()
        .map(|c| {
            let label = match c.summary {
                Some(v) => format!("{} {:.2}", names[c.class], v),
                None => format!("{} n/a", names[c.class]),
            };
            (label, c.points.iter().map(|p| (p.x, p.y)).collect(), false)
        })
        .collect()
}

/// Write every report file into `out_dir` and return the paths in write
/// order. Identical reports produce byte-identical files.
pub fn render_report(report: &EvalReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let names = &report.class_names;
    let mut files = Vec::new();

    let json = serde_json::to_string_pretty(&report.summary()).map_err(|e| Error::json(out_dir, e))?;
    files.push(write_text(&out_dir.join("report.json"), &(json + "\n"))?);

    let mut header = vec!["true\\predicted"];
    header.extend(names.iter().map(String::as_str));
    files.push(write_rows(
        &out_dir.join("confusion.csv"),
        &header,
        report.confusion.counts.iter().enumerate().map(|(i, row)| {
            std::iter::once(names[i].clone())
                .chain(row.iter().map(u64::to_string))
                .collect()
        }),
    )?);

    let r = &report.report;
    let mut rows: Vec<Vec<String>> = r
        .per_class
        .iter()
        .zip(names)
        .map(|(m, n)| {
            vec![
                n.clone(),
                format_float(m.precision),
                format_float(m.recall),
                format_float(m.f1),
                m.support.to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        "macro avg".into(),
        format_float(r.macro_precision),
        format_float(r.macro_recall),
        format_float(r.macro_f1),
        report.n_samples.to_string(),
    ]);
    rows.push(vec![
        "accuracy".into(),
        String::new(),
        String::new(),
        format_float(r.accuracy),
        report.n_samples.to_string(),
    ]);
    files.push(write_rows(
        &out_dir.join("report.csv"),
        &["class", "precision", "recall", "f1", "support"],
        rows,
    )?);

    let mut header = vec!["true_class"];
    header.extend(names.iter().map(String::as_str));
    header.push("misclassified");
    files.push(write_rows(
        &out_dir.join("prediction_error.csv"),
        &header,
        report.prediction_error.iter().map(|row| {
            std::iter::once(names[row.true_class].clone())
                .chain(row.predicted_counts.iter().map(u64::to_string))
                .chain(std::iter::once(row.misclassified.to_string()))
                .collect()
        }),
    )?);

    for (c, name) in names.iter().enumerate() {
        let safe = file_safe(name);
        files.push(write_rows(
            &out_dir.join(format!("roc_{safe}.csv")),
            &["fpr", "tpr", "threshold"],
            curve_rows(&report.roc, c),
        )?);
        files.push(write_rows(
            &out_dir.join(format!("pr_{safe}.csv")),
            &["recall", "precision", "threshold"],
            curve_rows(&report.pr, c),
        )?);
    }

    let lc = report.learning_curve.as_deref().unwrap_or(&[]);
    files.push(write_rows(
        &out_dir.join("learning_curve.csv"),
        &["fraction", "n_train", "train_score", "cv_score"],
        lc.iter().map(|p| {
            vec![
                format_float(p.fraction),
                format_float(p.n_train),
                format_float(p.train_score),
                format_float(p.cv_score),
            ]
        }),
    )?);

    files.push(write_text(
        &out_dir.join("confusion.svg"),
        &svg::heatmap(&format!("{}: confusion matrix", report.title), names, &report.confusion.counts),
    )?);
    files.push(write_text(
        &out_dir.join("report.svg"),
        &svg::grouped_bars(
            &format!("{}: classification report", report.title),
            "score",
            names,
            &["precision".into(), "recall".into(), "f1".into()],
            &r.per_class.iter().map(|m| vec![m.precision, m.recall, m.f1]).collect::<Vec<_>>(),
            1.0,
        ),
    )?);
    files.push(write_text(
        &out_dir.join("prediction_error.svg"),
        &svg::stacked_bars(
            &format!("{}: class prediction error", report.title),
            "count",
            names,
            names,
            &report
                .prediction_error
                .iter()
                .map(|row| row.predicted_counts.iter().map(|&v| v as f64).collect())
                .collect::<Vec<_>>(),
        ),
    )?);
    let mut roc_series = curve_series(&report.roc, names);
    roc_series.push(("chance".into(), vec![(0.0, 0.0), (1.0, 1.0)], true));
    files.push(write_text(
        &out_dir.join("roc.svg"),
        &svg::line_chart(
            &format!("{}: ROC", report.title),
            "false positive rate",
            "true positive rate",
            &roc_series,
            (0.0, 1.0),
            (0.0, 1.0),
        ),
    )?);
    files.push(write_text(
        &out_dir.join("pr.svg"),
        &svg::line_chart(
            &format!("{}: precision-recall", report.title),
            "recall",
            "precision",
            &curve_series(&report.pr, names),
            (0.0, 1.0),
            (0.0, 1.0),
        ),
    )?);
    let x_max = lc.iter().map(|p| p.n_train).fold(1.0, f64::max);
    files.push(write_text(
        &out_dir.join("learning_curve.svg"),
        &svg::line_chart(
            &format!("{}: learning curve", report.title),
            "training rows",
            "accuracy",
            &[
                ("train".into(), lc.iter().map(|p| (p.n_train, p.train_score)).collect(), false),
                ("cv".into(), lc.iter().map(|p| (p.n_train, p.cv_score)).collect(), false),
            ],
            (0.0, x_max),
            (0.0, 1.0),
        ),
    )?);
    Ok(files)
}
