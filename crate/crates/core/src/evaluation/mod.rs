//! Classification metrics, one-vs-rest ROC and precision-recall curves, and
//! report files (CSV, JSON and minimal SVG).

mod curves;
mod metrics;
mod report;
mod svg;

pub use curves::{pr_average_precision, roc_auc, ClassCurve, CurveKind, CurvePoint, CurveSet};
pub use metrics::{
    class_prediction_error, class_report, confusion_matrix, ClassMetrics, ClassReport,
    ConfusionMatrix, PredictionErrorRow,
};
pub use report::{evaluate, render_report, ClassSummary, EvalReport, ReportBundle, ReportSummary};
