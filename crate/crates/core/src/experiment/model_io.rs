use std::fmt;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::model_select::Predictor;
use crate::preprocess::ScalerParams;
use crate::svm::SvmMulticlassModel;

/// Version written to every model file; other versions are refused.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    Mlp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(ModelKind::Svm),
            "mlp" => Ok(ModelKind::Mlp),
            _ => Err(Error::invalid(format!("unknown model kind {s:?} (svm, mlp)"))),
        }
    }
}

/// A fitted classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Svm(SvmMulticlassModel),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Svm(_) => ModelKind::Svm,
            TrainedModel::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Predicted labels and per-class scores. SVM scores are summed signed
    /// pairwise decisions; MLP scores are class probabilities.
    pub fn predict_with_scores(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        match self {
            TrainedModel::Svm(m) => m.predict_with_scores(x),
            TrainedModel::Mlp(m) => Ok((m.predict(x)?, m.predict_proba(x)?)),
        }
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        match self {
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Mlp(m) => m.predict(x),
        }
    }
}

/// A model file: classifier, the scaler it expects its input through, and
/// the class names its labels index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub classes: Vec<String>,
    pub scaler: Option<ScalerParams>,
    pub model: TrainedModel,
}

impl SavedModel {
    pub fn new(classes: Vec<String>, scaler: Option<ScalerParams>, model: TrainedModel) -> Self {
        SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            classes,
            scaler,
            model,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Scale raw feature rows, then predict.
    pub fn predict_with_scores(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        match &self.scaler {
            Some(s) => self.model.predict_with_scores(s.apply(x)?.view()),
            None => self.model.predict_with_scores(x),
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        match &self.scaler {
            Some(s) => self.model.predict(s.apply(x)?.view()),
            None => self.model.predict(x),
        }
    }
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    let text = serde_json::to_string_pretty(model).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Read a model file, refusing other format versions and, when `expected`
/// is given, the other model family.
pub fn load_model(path: &Path, expected: Option<ModelKind>) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::ModelFormat(format!("{}: missing field `format_version`", path.display())))?;
    if version.as_u64() != Some(MODEL_FORMAT_VERSION as u64) {
        return Err(Error::ModelFormat(format!(
            "{}: field `format_version` is {version}, this build reads {MODEL_FORMAT_VERSION}",
            path.display()
        )));
    }
    let saved: SavedModel = serde_json::from_value(value)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if let Some(kind) = expected {
        if saved.kind() != kind {
            return Err(Error::ModelFormat(format!(
                "{}: kind mismatch, file holds a {} model but {kind} was requested",
                path.display(),
                saved.kind()
            )));
        }
    }
    Ok(saved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{self, MlpConfig};
    use crate::preprocess::{fit_scaler, ScalerKind};
    use crate::svm::{SmoOptions, SvmParams};
    use crate::test_util::blobs;

    fn fitted() -> (Array2<f64>, SavedModel, SavedModel) {
        let (x, y) = blobs(3, 20, 4, 3.0, 11);
        let scaler = fit_scaler(x.view(), ScalerKind::Standard).unwrap();
        let xs = scaler.apply(x.view()).unwrap();
        let svm = SvmParams::default().fit(xs.view(), &y, 3, &SmoOptions::default()).unwrap();
        let cfg = MlpConfig {
            hidden_layers: vec![8],
            max_epochs: 20,
            ..MlpConfig::default()
        };
        let (mlp, _) = mlp::fit(&cfg, xs.view(), &y, 3).unwrap();
        let classes = vec!["a".to_string(), "b".into(), "c".into()];
        (
            x,
            SavedModel::new(classes.clone(), Some(scaler.clone()), TrainedModel::Svm(svm)),
            SavedModel::new(classes, Some(scaler), TrainedModel::Mlp(mlp)),
        )
    }

    #[test]
    fn round_trip_predictions_are_bit_identical() {
        let (_, svm, mlp) = fitted();
        let (probe, _) = blobs(4, 25, 4, 5.0, 99);
        let dir = tempfile::tempdir().unwrap();
        for saved in [svm, mlp] {
            let path = dir.path().join(format!("{}.json", saved.kind()));
            save_model(&path, &saved).unwrap();
            let back = load_model(&path, Some(saved.kind())).unwrap();
            assert_eq!(back, saved);
            let (a, sa) = saved.predict_with_scores(probe.view()).unwrap();
            let (b, sb) = back.predict_with_scores(probe.view()).unwrap();
            assert_eq!(a, b);
            let bits = |m: &Array2<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&sa), bits(&sb));
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let (_, svm, _) = fitted();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&path, &svm).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path, None), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn svm_file_loaded_as_mlp_is_a_kind_mismatch() {
        let (_, svm, _) = fitted();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&path, &svm).unwrap();
        let err = load_model(&path, Some(ModelKind::Mlp)).unwrap_err();
        assert!(err.to_string().contains("kind mismatch"), "{err}");
    }

    #[test]
    fn version_and_field_errors_name_the_field() {
        let (_, svm, _) = fitted();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut value = serde_json::to_value(&svm).unwrap();
        value["format_version"] = 99.into();
        std::fs::write(&path, value.to_string()).unwrap();
        let err = load_model(&path, None).unwrap_err().to_string();
        assert!(err.contains("format_version"), "{err}");

        let mut value = serde_json::to_value(&svm).unwrap();
        value["model"].as_object_mut().unwrap().remove("pairs");
        std::fs::write(&path, value.to_string()).unwrap();
        let err = load_model(&path, None).unwrap_err().to_string();
        assert!(err.contains("pairs"), "{err}");
    }
}
