//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα    s.t.  yᵀα = 0,  0 ≤ α_i ≤ C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Working pairs are chosen by maximal violation for the first index and the
//! second-order gain rule for the second. The gradient `G = Qα − e` is kept
//! up to date so each step touches two kernel rows.

use std::collections::VecDeque;

use log::debug;
use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::kernel::{row_sq_norms, KernelSpec};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Multipliers at or below this are dropped from the support set.
pub const SUPPORT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoOptions {
    /// Stop once the maximal KKT violation is at most this.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10⁷, 100·n)`.
    pub max_iter: Option<usize>,
    /// Memory budget for cached kernel rows.
    pub cache_bytes: usize,
    /// Record the dual objective after every step.
    pub record_objective: bool,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            tol: 1e-3,
            max_iter: None,
            cache_bytes: 256 << 20,
            record_objective: false,
        }
    }
}

/// Raw dual solution over all training points.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective `eᵀα − ½αᵀQα` after each step, when recorded.
    pub objective_trace: Vec<f64>,
}

/// Bounded FIFO cache of kernel rows.
struct KernelRows<'a> {
    x: ArrayView2<'a, f64>,
    kernel: KernelSpec,
    norms: Vec<f64>,
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: ArrayView2<'a, f64>, kernel: KernelSpec, cache_bytes: usize) -> Self {
        let n = x.nrows();
        let capacity = (cache_bytes / (8 * n.max(1))).max(2);
        KernelRows {
            norms: row_sq_norms(x),
            x,
            kernel,
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity,
        }
    }

    fn diag(&self) -> Vec<f64> {
        self.norms
            .iter()
            .map(|&n| self.kernel.from_dot(n, n, n))
            .collect()
    }

    /// Compute row `i` if missing, never evicting row `keep`.
    fn ensure(&mut self, i: usize, keep: Option<usize>) {
        if self.rows[i].is_some() {
            return;
        }
        while self.order.len() >= self.capacity {
            let Some(old) = self.order.pop_front() else { break };
            if Some(old) == keep {
                self.order.push_back(old);
                continue;
            }
            self.rows[old] = None;
        }
        let dots = self.x.dot(&self.x.row(i));
        let ni = self.norms[i];
        let row = dots
            .iter()
            .zip(&self.norms)
            .map(|(&d, &nj)| self.kernel.from_dot(d, ni, nj))
            .collect();
        self.rows[i] = Some(row);
        self.order.push_back(i);
    }

    fn row(&self, i: usize) -> &[f64] {
        self.rows[i].as_deref().expect("row ensured")
    }
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    // f = ½ αᵀ(G − e); the dual objective is −f.
    -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
}

/// Solve the dual for labels `y ∈ {−1, +1}`.
pub fn solve_dual(
    x: ArrayView2<f64>,
    y: &[f64],
    c: f64,
    kernel: &KernelSpec,
    opts: &SmoOptions,
) -> Result<SmoSolution> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C = {c} must be positive")));
    }
    kernel.validate()?;
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("binary SVM labels must be ±1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::invalid("binary SVM needs both classes present"));
    }

    let mut cache = KernelRows::new(x, *kernel, opts.cache_bytes);
    let qd = cache.diag();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = opts.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000));
    let track = opts.record_objective || cfg!(debug_assertions);
    let mut trace = Vec::new();
    let mut last_obj = 0.0_f64;
    let mut converged = false;
    let mut iter = 0;

    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    while iter < max_iter {
        // First index: maximal violation in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (!is_upper(alpha[t])).then(|| -grad[t])
            } else {
                (!is_lower(alpha[t])).then_some(grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        cache.ensure(i, None);

        // Second index: largest second-order decrease within I_low.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j_sel = None;
        {
            let k_i = cache.row(i);
            for t in 0..n {
                let gd = if y[t] > 0.0 {
                    if is_lower(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    gmax + grad[t]
                } else {
                    if is_upper(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    gmax - grad[t]
                };
                if gd > 0.0 {
                    let mut quad = qd[i] + qd[t] - 2.0 * k_i[t];
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(gd * gd) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let j = match j_sel {
            Some(j) if gmax + gmax2 >= opts.tol => j,
            _ => {
                converged = true;
                break;
            }
        };
        cache.ensure(j, Some(i));
        iter += 1;

        let k_ij = cache.row(i)[j];
        let mut quad = qd[i] + qd[j] - 2.0 * k_ij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        // Q_it Δα_i + Q_jt Δα_j with Q_st = y_s y_t K_st.
        let (yi_di, yj_dj) = (y[i] * di, y[j] * dj);
        let (k_i, k_j) = (cache.row(i), cache.row(j));
        for t in 0..n {
            grad[t] += y[t] * (yi_di * k_i[t] + yj_dj * k_j[t]);
        }

        if track {
            let obj = dual_objective(&alpha, &grad);
            debug_assert!(
                obj >= last_obj - 1e-9 * (1.0 + last_obj.abs()),
                "dual objective decreased: {last_obj} -> {obj}"
            );
            last_obj = obj;
            if opts.record_objective {
                trace.push(obj);
            }
        }
    }
    if !converged {
        debug!("SMO stopped after {iter} iterations without meeting tol {}", opts.tol);
    }

    let bias = compute_bias(&alpha, &grad, y, c);
    Ok(SmoSolution {
        alpha,
        bias,
        converged,
        iterations: iter,
        objective_trace: trace,
    })
}

/// Bias as the mean of `−y_i G_i` over free multipliers, or the midpoint of
/// the feasible interval when none are free.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}

/// Two-class kernel SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmBinaryModel {
    pub support_vectors: Array2<f64>,
    /// `α_i · y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub converged: bool,
}

impl SvmBinaryModel {
    pub fn decision_function(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.support_vectors.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.support_vectors.ncols(),
                got: x.ncols(),
            });
        }
        let k = self.kernel.matrix(x, self.support_vectors.view());
        let coefs = ArrayView1::from(&self.dual_coefs);
        Ok(k.dot(&coefs).iter().map(|v| v + self.bias).collect())
    }

    /// Sign of the decision value as ±1 (0 maps to +1).
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }
}

/// Train a binary SVM on labels `y ∈ {−1, +1}`.
pub fn train_binary(
    x: ArrayView2<f64>,
    y: &[f64],
    c: f64,
    kernel: &KernelSpec,
    opts: &SmoOptions,
) -> Result<SvmBinaryModel> {
    let sol = solve_dual(x, y, c, kernel, opts)?;
    let sv: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > SUPPORT_EPS).collect();
    Ok(SvmBinaryModel {
        support_vectors: x.select(Axis(0), &sv),
        dual_coefs: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
        bias: sol.bias,
        kernel: *kernel,
        c,
        converged: sol.converged,
    })
}
