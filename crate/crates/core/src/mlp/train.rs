use std::path::Path;

use log::debug;
use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{init_weights, one_hot, Activation, MlpModel};
use crate::error::{Error, Result};
use crate::preprocess::{class_counts, format_float, stratified_split_indices, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateMode {
    Constant,
    Adaptive,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
/// Adaptive mode gives up once the learning rate falls below this.
const MIN_ADAPTIVE_LR: f64 = 1e-6;
const DEFAULT_BATCH: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub solver: Solver,
    /// L2 penalty strength.
    pub alpha: f64,
    pub learning_rate_mode: LearningRateMode,
    pub initial_lr: f64,
    /// Adam denominator term.
    pub epsilon: f64,
    /// `None` means `min(200, n)`.
    pub batch_size: Option<usize>,
    pub max_epochs: usize,
    pub early_stopping: bool,
    pub validation_fraction: f64,
    pub n_iter_no_change: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: vec![100],
            activation: Activation::Relu,
            solver: Solver::Adam,
            alpha: 1e-4,
            learning_rate_mode: LearningRateMode::Constant,
            initial_lr: 1e-3,
            epsilon: 1e-8,
            batch_size: None,
            max_epochs: 200,
            early_stopping: false,
            validation_fraction: 0.1,
            n_iter_no_change: 10,
            tol: 1e-4,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.contains(&0) {
            return Err(Error::invalid("hidden layer sizes must be ≥ 1"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid("validation_fraction must lie in (0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be > 0"));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::invalid("initial learning rate must be > 0"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::invalid("alpha must be ≥ 0"));
        }
        if self.max_epochs == 0 || self.n_iter_no_change == 0 || self.batch_size == Some(0) {
            return Err(Error::invalid("max_epochs, n_iter_no_change and batch_size must be ≥ 1"));
        }
        Ok(())
    }
}

/// One optimizer over the flattened parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    solver: Solver,
    epsilon: f64,
    pub lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(solver: Solver, lr: f64, epsilon: f64, n_params: usize) -> Self {
        let state = if solver == Solver::Adam { n_params } else { 0 };
        Optimizer {
            solver,
            epsilon,
            lr,
            m: vec![0.0; state],
            v: vec![0.0; state],
            t: 0,
        }
    }

    /// Plain sgd: `θ −= lr·g`. Adam: `θ −= lr·m̂ / (√v̂ + ε)` with
    /// bias-corrected moments.
    pub fn step<'a>(&mut self, params: impl Iterator<Item = &'a mut f64>, grads: impl Iterator<Item = &'a f64>) {
        match self.solver {
            Solver::Sgd => {
                for (p, g) in params.zip(grads) {
                    *p -= self.lr * g;
                }
            }
            Solver::Adam => {
                self.t += 1;
                let c1 = 1.0 - BETA1.powi(self.t);
                let c2 = 1.0 - BETA2.powi(self.t);
                for (((p, &g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Stopped by a convergence or early-stopping rule rather than the
    /// epoch cap.
    pub converged: bool,
    /// Epoch whose weights were returned when early stopping is on.
    pub best_epoch: Option<usize>,
}

impl TrainHistory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["epoch", "train_loss", "val_accuracy"])
            .map_err(|e| Error::csv(path, e))?;
        for r in &self.epochs {
            let val = r.val_accuracy.map(format_float).unwrap_or_default();
            w.write_record([r.epoch.to_string(), format_float(r.train_loss), val])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn accuracy(model: &MlpModel, x: ArrayView2<f64>, y: &[usize]) -> Result<f64> {
    let pred = model.predict(x)?;
    Ok(pred.iter().zip(y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64)
}

/// Train on a labeled dataset.
pub fn train(config: &MlpConfig, ds: &LabeledDataset) -> Result<(MlpModel, TrainHistory)> {
    fit(config, ds.x.view(), &ds.y, ds.n_classes())
}

/// Minibatch training with seeded shuffling each epoch.
///
/// Without early stopping, training ends once the epoch loss has failed to
/// improve by `tol` for `n_iter_no_change` epochs. With it, a stratified
/// `validation_fraction` is held out and training ends after
/// `n_iter_no_change` epochs without a validation accuracy gain above
/// `tol`; the best-scoring weights are returned. In adaptive mode a loss
/// plateau divides the learning rate by 5 instead of stopping.
pub fn fit(
    config: &MlpConfig,
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange { label: bad, n_classes });
    }
    let counts = class_counts(y, n_classes);
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::invalid("MLP training needs at least 2 classes present"));
    }

    let (train_idx, val_idx) = if config.early_stopping {
        if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c == 1) {
            return Err(Error::ClassTooSmall {
                class,
                count,
                needed: 2,
            });
        }
        stratified_split_indices(y, n_classes, config.validation_fraction, config.seed)?
    } else {
        ((0..y.len()).collect(), Vec::new())
    };
    let xt = x.select(Axis(0), &train_idx);
    let yt: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
    let yt_hot = one_hot(&yt, n_classes);
    let xv = x.select(Axis(0), &val_idx);
    let yv: Vec<usize> = val_idx.iter().map(|&i| y[i]).collect();

    let mut model = init_weights(&config.hidden_layers, config.activation, x.ncols(), n_classes, config.seed)?;
    let mut opt = Optimizer::new(config.solver, config.initial_lr, config.epsilon, model.n_params());
    let n = yt.len();
    let batch = config.batch_size.unwrap_or(DEFAULT_BATCH).min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..n).collect();

    let mut history = TrainHistory {
        epochs: Vec::new(),
        converged: false,
        best_epoch: None,
    };
    let mut best_loss = f64::INFINITY;
    let mut loss_stall = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut val_stall = 0usize;
    let mut best_model: Option<MlpModel> = None;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let xb = xt.select(Axis(0), chunk);
            let yb = yt_hot.select(Axis(0), chunk);
            let (loss, grads) = model.loss_and_gradients(xb.view(), yb.view(), config.alpha)?;
            total += loss * chunk.len() as f64;
            opt.step(model.params_mut(), grads.iter());
        }
        let epoch_loss = total / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::invalid(format!("training diverged at epoch {epoch}")));
        }

        let val_accuracy = if config.early_stopping {
            Some(accuracy(&model, xv.view(), &yv)?)
        } else {
            None
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: epoch_loss,
            val_accuracy,
            learning_rate: opt.lr,
        });

        if epoch_loss > best_loss - config.tol {
            loss_stall += 1;
        } else {
            loss_stall = 0;
        }
        best_loss = best_loss.min(epoch_loss);

        if let Some(score) = val_accuracy {
            if score > best_val + config.tol {
                val_stall = 0;
            } else {
                val_stall += 1;
            }
            if score > best_val {
                best_val = score;
                best_model = Some(model.clone());
                history.best_epoch = Some(epoch);
            }
            if val_stall >= config.n_iter_no_change {
                history.converged = true;
                break;
            }
        }

        if loss_stall >= config.n_iter_no_change {
            match config.learning_rate_mode {
                LearningRateMode::Adaptive if opt.lr / 5.0 >= MIN_ADAPTIVE_LR => {
                    opt.lr /= 5.0;
                    loss_stall = 0;
                }
                _ if config.early_stopping => loss_stall = 0,
                _ => {
                    history.converged = true;
                    break;
                }
            }
        }
    }
    if !history.converged {
        debug!("MLP hit max_epochs = {} before converging", config.max_epochs);
    }
    if let Some(best) = best_model {
        model = best;
    }
    Ok((model, history))
}
