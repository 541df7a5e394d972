use ndarray::{Array2, ArrayView2};

use crate::error::Result;
use crate::mlp::{self, MlpConfig, MlpModel};
use crate::preprocess::{fit_scaler, ScalerKind, ScalerParams};
use crate::svm::{SmoOptions, SvmMulticlassModel, SvmParams};

/// A fitted classifier.
pub trait Predictor {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>>;
}

/// Something that fits a [`Predictor`] to a labeled matrix.
pub trait Estimator: Sync {
    type Model: Predictor + Send;

    fn fit(&self, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<Self::Model>;
}

impl Predictor for SvmMulticlassModel {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        SvmMulticlassModel::predict(self, x)
    }
}

impl Predictor for MlpModel {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        MlpModel::predict(self, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmEstimator {
    pub params: SvmParams,
    pub opts: SmoOptions,
}

impl Estimator for SvmEstimator {
    type Model = SvmMulticlassModel;

    fn fit(&self, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<SvmMulticlassModel> {
        self.params.fit(x, y, n_classes, &self.opts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpEstimator {
    pub config: MlpConfig,
}

impl Estimator for MlpEstimator {
    type Model = MlpModel;

    fn fit(&self, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<MlpModel> {
        Ok(mlp::fit(&self.config, x, y, n_classes)?.0)
    }
}

/// An estimator preceded by a scaler fitted on the same training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<E> {
    pub scaler: Option<ScalerKind>,
    pub inner: E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledModel<M> {
    pub scaler: Option<ScalerParams>,
    pub model: M,
}

impl<M> ScaledModel<M> {
    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        match &self.scaler {
            Some(s) => s.apply(x),
            None => Ok(x.to_owned()),
        }
    }
}

impl<M: Predictor> Predictor for ScaledModel<M> {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        match &self.scaler {
            Some(s) => self.model.predict(s.apply(x)?.view()),
            None => self.model.predict(x),
        }
    }
}

impl<E: Estimator> Estimator for Scaled<E> {
    type Model = ScaledModel<E::Model>;

    fn fit(&self, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<Self::Model> {
        match self.scaler {
            Some(kind) => {
                let params = fit_scaler(x, kind)?;
                let xs = params.apply(x)?;
                Ok(ScaledModel {
                    model: self.inner.fit(xs.view(), y, n_classes)?,
                    scaler: Some(params),
                })
            }
            None => Ok(ScaledModel {
                scaler: None,
                model: self.inner.fit(x, y, n_classes)?,
            }),
        }
    }
}
