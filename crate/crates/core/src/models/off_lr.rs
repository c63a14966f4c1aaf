use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_shapes, OffPredictor, SubsetKey};
use crate::dataset::{LabeledDataset, Schema};
use crate::error::{OffError, Result};
use crate::glm::{sigmoid, FitConfig, LogisticParams};
use crate::learner::{LogisticLearner, SubsetLearner};

/// Additive contribution of one disclosed optional feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionalTerm {
    /// ω_i: shift of the base-feature weights.
    pub omega: Vec<f64>,
    /// β_i: weight of the feature value itself.
    pub beta: f64,
    /// s_i: intercept shift.
    pub s: f64,
}

/// Logistic model whose log-odds for availability set `I` are
/// `wᵀb + t + Σ_{i∈I} (ω_iᵀb + β_i z_i + s_i)`.
///
/// `r + 1` logistic fits determine all `2^r` subset models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffLrModel {
    pub schema: Schema,
    pub w: Vec<f64>,
    pub t: f64,
    pub terms: Vec<OptionalTerm>,
    #[serde(default)]
    pub fits: usize,
}

impl OffLrModel {
    /// Recombines a base fit and the `r` single-feature fits:
    /// ω_k = w({k}) − w(∅), β_k = β({k}), s_k = s({k}) − s(∅).
    ///
    /// Each single fit has `n + 1` weights, the last one belonging to `z_k`.
    pub fn from_subset_fits(schema: Schema, base: &LogisticParams, singles: &[LogisticParams]) -> Result<Self> {
        let n = base.dim();
        if singles.len() != schema.n_optional() || n != schema.n_base() {
            return Err(OffError::DimensionMismatch {
                expected: schema.n_optional(),
                got: singles.len(),
            });
        }
        let terms = singles
            .iter()
            .map(|single| {
                if single.dim() != n + 1 {
                    return Err(OffError::DimensionMismatch {
                        expected: n + 1,
                        got: single.dim(),
                    });
                }
                Ok(OptionalTerm {
                    omega: single.weights[..n].iter().zip(&base.weights).map(|(a, b)| a - b).collect(),
                    beta: single.weights[n],
                    s: single.intercept - base.intercept,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema,
            w: base.weights.clone(),
            t: base.intercept,
            terms,
            fits: 0,
        })
    }

    /// Stored scalars: `nr + n + 2r + 1`.
    pub fn n_params(&self) -> usize {
        self.w.len() + 1 + self.terms.iter().map(|t| t.omega.len() + 2).sum::<usize>()
    }

    pub fn log_odds(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.w.len(), self.terms.len(), b, a, z)?;
        let dot = |u: &[f64]| u.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut eta = dot(&self.w) + self.t;
        for (i, term) in self.terms.iter().enumerate() {
            if a[i] {
                eta += dot(&term.omega) + term.beta * z[i] + term.s;
            }
        }
        Ok(eta)
    }

    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        self.log_odds(b, a, z).map(sigmoid)
    }

    /// The logistic subset model this parameterisation implies for `key`,
    /// over inputs `[b | z_I]`.
    pub fn subset_params(&self, key: SubsetKey) -> LogisticParams {
        let mut weights = self.w.clone();
        let mut intercept = self.t;
        let mut betas = Vec::new();
        for i in key.indices() {
            let term = &self.terms[i];
            for (w, o) in weights.iter_mut().zip(&term.omega) {
                *w += o;
            }
            betas.push(term.beta);
            intercept += term.s;
        }
        weights.extend(betas);
        LogisticParams { weights, intercept }
    }
}

impl OffPredictor for OffLrModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        OffLrModel::predict(self, b, a, z)
    }
}

pub fn fit_off_lr(ds: &LabeledDataset, cfg: &FitConfig) -> Result<OffLrModel> {
    fit_off_lr_with(ds, &LogisticLearner::new(*cfg))
}

/// Fits the base model on all rows, then one model per optional feature `k` on
/// the rows where `k` is available using `[base | z_k]`, and recombines.
/// The learner must produce logistic models.
pub fn fit_off_lr_with(ds: &LabeledDataset, learner: &dyn SubsetLearner) -> Result<OffLrModel> {
    let r = ds.n_optional();
    let keys: Vec<SubsetKey> = std::iter::once(SubsetKey::empty(r))
        .chain((0..r).map(|k| SubsetKey::from_indices(r, &[k])))
        .collect();
    let params: Vec<LogisticParams> = keys
        .par_iter()
        .map(|&key| {
            let rows = ds.rows_with_superset(key);
            if rows.len() < learner.min_rows() {
                return Err(OffError::InsufficientSubset { key, rows: rows.len() });
            }
            let x = ds.design_for_subset(&rows, key);
            let y: Vec<u8> = rows.iter().map(|&j| ds.labels()[j]).collect();
            let w: Option<Vec<f64>> = ds.weights().map(|w| rows.iter().map(|&j| w[j]).collect());
            let model = learner.fit(&x, &y, w.as_deref()).map_err(|e| match e {
                OffError::DegenerateLabels | OffError::EmptyDataset | OffError::Singular if !key.is_empty() => {
                    OffError::InsufficientSubset { key, rows: rows.len() }
                }
                other => other,
            })?;
            model
                .as_logistic()
                .cloned()
                .ok_or_else(|| OffError::InvalidParameter(format!("OFF-LR needs a logistic learner, got {}", learner.name())))
        })
        .collect::<Result<_>>()?;
    let mut model = OffLrModel::from_subset_fits(ds.schema().clone(), &params[0], &params[1..])?;
    model.fits = keys.len();
    Ok(model)
}

pub fn predict_off_lr(m: &OffLrModel, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
    m.predict(b, a, z)
}
