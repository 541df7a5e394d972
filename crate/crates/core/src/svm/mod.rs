//! Soft-margin kernel SVMs trained by SMO, with one-vs-one multiclass
//! voting.

mod kernel;
mod multiclass;
mod smo;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, scale_gamma, KernelKind, KernelSpec};
pub use multiclass::{train_multiclass, vote, PairwiseModel, SvmMulticlassModel};
pub use smo::{solve_dual, train_binary, SmoOptions, SmoSolution, SvmBinaryModel, SUPPORT_EPS};

use crate::error::Result;

/// User-facing SVM hyperparameters. A missing `gamma` is resolved from the
/// training data with [`scale_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelKind,
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelKind::Rbf,
            gamma: None,
            degree: 3,
            coef0: 0.0,
        }
    }
}

impl SvmParams {
    pub fn kernel_for(&self, x: ArrayView2<f64>) -> KernelSpec {
        KernelSpec {
            kind: self.kernel,
            gamma: self.gamma.unwrap_or_else(|| scale_gamma(x)),
            degree: self.degree,
            coef0: self.coef0,
        }
    }

    pub fn fit(
        &self,
        x: ArrayView2<f64>,
        y: &[usize],
        n_classes: usize,
        opts: &SmoOptions,
    ) -> Result<SvmMulticlassModel> {
        let kernel = self.kernel_for(x);
        train_multiclass(x, y, n_classes, self.c, &kernel, opts)
    }
}

/// Largest KKT residual of a dual solution, measured against the decision
/// values `f(x_i) = Σ α_j y_j K(x_j, x_i) + b`:
///
/// * `α = 0` needs `y·f ≥ 1`,
/// * `α = C` needs `y·f ≤ 1`,
/// * `0 < α < C` needs `y·f = 1`.
pub fn max_kkt_residual(
    x: ArrayView2<f64>,
    y: &[f64],
    c: f64,
    kernel: &KernelSpec,
    alpha: &[f64],
    bias: f64,
) -> f64 {
    let k = kernel.matrix(x, x);
    let bound_eps = 1e-12 * c.max(1.0);
    (0..y.len())
        .map(|i| {
            let f: f64 = (0..y.len()).map(|j| alpha[j] * y[j] * k[[j, i]]).sum::<f64>() + bias;
            let m = y[i] * f;
            if alpha[i] <= bound_eps {
                (1.0 - m).max(0.0)
            } else if alpha[i] >= c - bound_eps {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}
