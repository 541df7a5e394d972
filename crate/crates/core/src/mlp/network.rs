use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Logistic,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Tanh, Activation::Relu, Activation::Logistic];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        }
    }

    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Logistic => z.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp())),
        }
    }

    /// Multiply `delta` by the derivative, expressed through the layer output.
    fn backprop(self, delta: &mut Array2<f64>, out: &Array2<f64>) {
        let d: fn(f64) -> f64 = match self {
            Activation::Relu => |a| if a > 0.0 { 1.0 } else { 0.0 },
            Activation::Tanh => |a| 1.0 - a * a,
            Activation::Logistic => |a| a * (1.0 - a),
        };
        Zip::from(delta).and(out).for_each(|g, &a| *g *= d(a));
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown activation {s:?}")))
    }
}

/// Fully connected network with a softmax output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Layer `l` maps width `weights[l].nrows()` to `weights[l].ncols()`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub activation: Activation,
}

/// Gradients shaped like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Every layer's output for one batch; the first entry is the input and the
/// last the softmax probabilities.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn probs(&self) -> &Array2<f64> {
        self.activations.last().expect("at least input and output")
    }
}

/// Glorot-uniform weights with bound `sqrt(6 / (fan_in + fan_out))` and
/// zero biases.
pub fn init_weights(
    hidden: &[usize],
    activation: Activation,
    d_in: usize,
    n_classes: usize,
    seed: u64,
) -> Result<MlpModel> {
    if d_in == 0 || n_classes == 0 {
        return Err(Error::invalid("network needs ≥ 1 input and ≥ 1 class"));
    }
    if hidden.contains(&0) {
        return Err(Error::invalid("hidden layer sizes must be ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths: Vec<usize> = std::iter::once(d_in)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(n_classes))
        .collect();
    let mut weights = Vec::with_capacity(widths.len() - 1);
    let mut biases = Vec::with_capacity(widths.len() - 1);
    for w in widths.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
            rng.random_range(-bound..=bound)
        }));
        biases.push(Array1::zeros(fan_out));
    }
    Ok(MlpModel {
        weights,
        biases,
        activation,
    })
}

/// Row-wise softmax with the row maximum subtracted first.
pub(crate) fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row /= s;
    }
}

impl MlpModel {
    pub fn n_inputs(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.last().expect("non-empty").ncols()
    }

    pub fn hidden_layers(&self) -> Vec<usize> {
        self.weights[1..].iter().map(|w| w.nrows()).collect()
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.weights.len() - 1;
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(x.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[l].dot(w);
            z += b;
            if l == last {
                softmax_rows(&mut z);
            } else {
                self.activation.apply(&mut z);
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let cache = self.forward(x)?;
        Ok(cache.activations.into_iter().last().expect("output layer"))
    }

    /// Argmax of the probabilities, ties to the lower class index.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        let p = self.predict_proba(x)?;
        Ok(p.rows().into_iter().map(|r| argmax(r.iter().copied())).collect())
    }

    /// Mean cross-entropy plus `alpha / (2·n) · Σ‖W‖²` over the `n` rows of
    /// `x`, with gradients from backpropagation.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<f64>,
        y_onehot: ArrayView2<f64>,
        alpha: f64,
    ) -> Result<(f64, Gradients)> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::invalid("empty batch"));
        }
        if y_onehot.dim() != (n, self.n_classes()) {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes(),
                got: y_onehot.ncols(),
            });
        }
        let cache = self.forward(x)?;
        let nf = n as f64;
        let probs = cache.probs();
        let ce: f64 = Zip::from(probs)
            .and(&y_onehot)
            .fold(0.0, |acc, &p, &t| if t != 0.0 { acc - t * p.max(f64::MIN_POSITIVE).ln() } else { acc });
        let sq: f64 = self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum();
        let loss = ce / nf + alpha / (2.0 * nf) * sq;

        let n_layers = self.weights.len();
        let mut gw = Vec::with_capacity(n_layers);
        let mut gb = Vec::with_capacity(n_layers);
        let mut delta = (probs - &y_onehot) / nf;
        for l in (0..n_layers).rev() {
            let mut g = cache.activations[l].t().dot(&delta);
            g.scaled_add(alpha / nf, &self.weights[l]);
            gw.push(g);
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut prev = delta.dot(&self.weights[l].t());
                self.activation.backprop(&mut prev, &cache.activations[l]);
                delta = prev;
            }
        }
        gw.reverse();
        gb.reverse();
        Ok((
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        ))
    }

    /// Visit every parameter with its matching gradient entry.
    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .flat_map(|w| w.iter_mut())
            .chain(self.biases.iter_mut().flat_map(|b| b.iter_mut()))
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }
}

impl Gradients {
    pub(crate) fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
    }
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// One-hot encode labels into `n × n_classes`.
pub fn one_hot(y: &[usize], n_classes: usize) -> Array2<f64> {
    let mut m = Array2::zeros((y.len(), n_classes));
    for (i, &l) in y.iter().enumerate() {
        m[[i, l]] = 1.0;
    }
    m
}

/// Largest relative error between backpropagated gradients and central
/// finite differences of step `h`. Magnitudes below `1e-6` are measured
/// absolutely.
pub fn max_gradient_error(
    model: &MlpModel,
    x: ArrayView2<f64>,
    y_onehot: ArrayView2<f64>,
    alpha: f64,
    h: f64,
) -> Result<f64> {
    let (_, grads) = model.loss_and_gradients(x, y_onehot, alpha)?;
    let analytic: Vec<f64> = grads.iter().copied().collect();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = *probe.params_mut().nth(k).expect("index in range");
        *probe.params_mut().nth(k).expect("index in range") = orig + h;
        let plus = probe.loss_and_gradients(x, y_onehot, alpha)?.0;
        *probe.params_mut().nth(k).expect("index in range") = orig - h;
        let minus = probe.loss_and_gradients(x, y_onehot, alpha)?.0;
        *probe.params_mut().nth(k).expect("index in range") = orig;
        let numeric = (plus - minus) / (2.0 * h);
        let scale = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / scale);
    }
    Ok(worst)
}
