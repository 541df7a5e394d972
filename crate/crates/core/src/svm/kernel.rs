use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
    Poly,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
            KernelKind::Poly => "poly",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: 1.0,
            degree: 3,
            coef0: 0.0,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
            ..Self::linear()
        }
    }

    pub fn poly(gamma: f64, degree: u32, coef0: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Poly,
            gamma,
            degree,
            coef0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != KernelKind::Linear && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("kernel gamma {} must be > 0", self.gamma)));
        }
        if self.degree < 1 {
            return Err(Error::invalid("polynomial degree must be ≥ 1"));
        }
        Ok(())
    }

    /// Kernel value from a precomputed dot product and squared norms.
    #[inline]
    pub(crate) fn from_dot(&self, dot: f64, norm_a: f64, norm_b: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Rbf => (-self.gamma * (norm_a + norm_b - 2.0 * dot).max(0.0)).exp(),
            KernelKind::Poly => (self.gamma * dot + self.coef0).powi(self.degree as i32),
        }
    }

    /// Gram block `K(a_i, b_j)` for all row pairs.
    pub fn matrix(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
        let mut k = a.dot(&b.t());
        let na = row_sq_norms(a);
        let nb = row_sq_norms(b);
        for ((i, j), v) in k.indexed_iter_mut() {
            *v = self.from_dot(*v, na[i], nb[j]);
        }
        k
    }
}

pub(crate) fn row_sq_norms(x: ArrayView2<f64>) -> Vec<f64> {
    x.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect()
}

/// `linear = x·z`, `rbf = exp(−γ‖x−z‖²)`, `poly = (γ x·z + c0)^d`.
pub fn kernel_eval(spec: &KernelSpec, x: ArrayView1<f64>, z: ArrayView1<f64>) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    Ok(match spec.kind {
        KernelKind::Linear => x.dot(&z),
        KernelKind::Rbf => {
            let d2: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            (-spec.gamma * d2).exp()
        }
        KernelKind::Poly => (spec.gamma * x.dot(&z) + spec.coef0).powi(spec.degree as i32),
    })
}

/// `1 / (n_features · Var(X))` over all entries, or 1 for constant data.
pub fn scale_gamma(x: ArrayView2<f64>) -> f64 {
    let n = x.len() as f64;
    if n == 0.0 {
        return 1.0;
    }
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}
