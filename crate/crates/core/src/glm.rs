//! Binary logistic regression fitted by damped Newton iterations (IRLS).
//!
//! The objective is the weighted mean negative log-likelihood plus an L2
//! penalty on the weights; the intercept is never penalized.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{OffError, Result};

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(p / (1 - p))`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Weight vector and intercept of a single logistic fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            intercept: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Linear predictor `wᵀx + t`.
    pub fn log_odds(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(OffError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(dot(&self.weights, x) + self.intercept)
    }

    /// Probability for a single input row.
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        self.log_odds(x).map(sigmoid)
    }

    /// Row-wise `sigmoid(Xw + t)`.
    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.weights.len() {
            return Err(OffError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.ncols(),
            });
        }
        Ok((0..x.nrows())
            .map(|j| sigmoid(row_dot(x, j, &self.weights) + self.intercept))
            .collect())
    }
}

/// Free-function form of [`LogisticParams::predict_proba`].
pub fn predict_proba(params: &LogisticParams, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    params.predict_proba(x)
}

/// Free-function form of [`LogisticParams::log_odds`].
pub fn log_odds(params: &LogisticParams, x: &[f64]) -> Result<f64> {
    params.log_odds(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub l2_penalty: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            l2_penalty: 1e-6,
            max_iters: 100,
            grad_tol: 1e-8,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(OffError::InvalidParameter(format!(
                "l2_penalty must be a nonnegative finite number, got {}",
                self.l2_penalty
            )));
        }
        if self.max_iters == 0 {
            return Err(OffError::InvalidParameter("max_iters must be positive".into()));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(OffError::InvalidParameter("grad_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`fit_logistic`]: the parameters plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub iterations: usize,
    pub grad_norm: f64,
    /// False when `max_iters` was hit before the gradient criterion (e.g. separable data).
    pub converged: bool,
    /// Objective value after every accepted iteration, starting at the initial point.
    pub objective_trace: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn row_dot(x: &DMatrix<f64>, j: usize, w: &[f64]) -> f64 {
    w.iter().enumerate().map(|(c, wc)| x[(j, c)] * wc).sum()
}

fn check_inputs(x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(OffError::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != x.nrows() {
            return Err(OffError::DimensionMismatch {
                expected: x.nrows(),
                got: w.len(),
            });
        }
    }
    Ok(())
}

fn total_weight(n: usize, weights: Option<&[f64]>) -> f64 {
    match weights {
        Some(w) => w.iter().sum(),
        None => n as f64,
    }
}

/// Weighted mean negative log-likelihood plus `l2 * ‖weights‖²`.
pub fn objective(
    params: &LogisticParams,
    x: &DMatrix<f64>,
    y: &[u8],
    weights: Option<&[f64]>,
    l2_penalty: f64,
) -> Result<f64> {
    check_inputs(x, y, weights)?;
    if x.ncols() != params.dim() {
        return Err(OffError::DimensionMismatch {
            expected: params.dim(),
            got: x.ncols(),
        });
    }
    let total = total_weight(x.nrows(), weights);
    let mut nll = 0.0;
    for j in 0..x.nrows() {
        let eta = row_dot(x, j, &params.weights) + params.intercept;
        let wj = weights.map_or(1.0, |w| w[j]);
        // -[y log σ(η) + (1-y) log(1-σ(η))] = softplus(η) - yη
        nll += wj * (softplus(eta) - f64::from(y[j]) * eta);
    }
    let penalty: f64 = params.weights.iter().map(|w| w * w).sum();
    Ok(nll / total + l2_penalty * penalty)
}

/// Analytic gradient of [`objective`]; the last entry is the intercept derivative.
pub fn gradient(
    params: &LogisticParams,
    x: &DMatrix<f64>,
    y: &[u8],
    weights: Option<&[f64]>,
    l2_penalty: f64,
) -> Result<Vec<f64>> {
    check_inputs(x, y, weights)?;
    if x.ncols() != params.dim() {
        return Err(OffError::DimensionMismatch {
            expected: params.dim(),
            got: x.ncols(),
        });
    }
    let (g, _) = grad_hess(params, x, y, weights, l2_penalty, false);
    Ok(g.iter().copied().collect())
}

fn grad_hess(
    params: &LogisticParams,
    x: &DMatrix<f64>,
    y: &[u8],
    weights: Option<&[f64]>,
    l2_penalty: f64,
    with_hessian: bool,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = params.dim();
    let total = total_weight(x.nrows(), weights);
    let mut g = DVector::zeros(d + 1);
    let mut h = DMatrix::zeros(if with_hessian { d + 1 } else { 0 }, if with_hessian { d + 1 } else { 0 });
    let mut row = vec![0.0; d + 1];
    row[d] = 1.0;
    for j in 0..x.nrows() {
        for c in 0..d {
            row[c] = x[(j, c)];
        }
        let eta = dot(&row[..d], &params.weights) + params.intercept;
        let p = sigmoid(eta);
        let wj = weights.map_or(1.0, |w| w[j]);
        let resid = wj * (p - f64::from(y[j]));
        for (a, ra) in row.iter().enumerate() {
            g[a] += resid * ra;
        }
        if with_hessian {
            let curv = wj * p * (1.0 - p);
            for a in 0..=d {
                let ca = curv * row[a];
                for b in a..=d {
                    h[(a, b)] += ca * row[b];
                }
            }
        }
    }
    g /= total;
    for c in 0..d {
        g[c] += 2.0 * l2_penalty * params.weights[c];
    }
    if with_hessian {
        h /= total;
        for a in 0..=d {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        for c in 0..d {
            h[(c, c)] += 2.0 * l2_penalty;
        }
    }
    (g, h)
}

/// Fits a logistic regression with Newton steps and step halving.
///
/// `weights`, when given, are per-row sample weights (they need not sum to one).
/// An empty feature matrix (`d = 0`) fits the intercept alone.
pub fn fit_logistic(
    x: &DMatrix<f64>,
    y: &[u8],
    weights: Option<&[f64]>,
    cfg: &FitConfig,
) -> Result<LogisticFit> {
    cfg.validate()?;
    check_inputs(x, y, weights)?;
    let n = x.nrows();
    if n < 2 {
        return Err(OffError::EmptyDataset);
    }
    let mut mass = [0.0f64; 2];
    for j in 0..n {
        let wj = weights.map_or(1.0, |w| w[j]);
        if !(wj >= 0.0 && wj.is_finite()) {
            return Err(OffError::InvalidParameter(format!("row weight {wj} at row {j}")));
        }
        mass[usize::from(y[j] != 0)] += wj;
    }
    if mass[0] <= 0.0 || mass[1] <= 0.0 {
        return Err(OffError::DegenerateLabels);
    }

    let d = x.ncols();
    let mut params = LogisticParams::zeros(d);
    params.intercept = (mass[1] / mass[0]).ln();
    let mut obj = objective(&params, x, y, weights, cfg.l2_penalty)?;
    let mut trace = vec![obj];
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let (g, h) = grad_hess(&params, x, y, weights, cfg.l2_penalty, true);
        grad_norm = g.norm();
        if grad_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => h.lu().solve(&g).ok_or(OffError::Singular)?,
        };
        if step.iter().any(|s| !s.is_finite()) {
            return Err(OffError::Singular);
        }

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand = params.clone();
            for c in 0..d {
                cand.weights[c] -= scale * step[c];
            }
            cand.intercept -= scale * step[d];
            let cand_obj = objective(&cand, x, y, weights, cfg.l2_penalty)?;
            if cand_obj <= obj {
                accepted = Some((cand, cand_obj));
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, cand_obj)) => {
                params = cand;
                obj = cand_obj;
                trace.push(obj);
            }
            // No descent possible at machine precision: we are at the optimum.
            None => {
                let (g, _) = grad_hess(&params, x, y, weights, cfg.l2_penalty, false);
                grad_norm = g.norm();
                converged = grad_norm <= cfg.grad_tol;
                break;
            }
        }
    }
    if !converged && iterations == cfg.max_iters {
        let (g, _) = grad_hess(&params, x, y, weights, cfg.l2_penalty, false);
        grad_norm = g.norm();
        converged = grad_norm <= cfg.grad_tol;
    }
    if cfg.l2_penalty == 0.0 && params.weights.iter().any(|w| !w.is_finite()) {
        return Err(OffError::Singular);
    }
    Ok(LogisticFit {
        params,
        iterations,
        grad_norm,
        converged,
        objective_trace: trace,
    })
}
