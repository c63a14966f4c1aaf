use serde::{Deserialize, Serialize};

use super::{check_shapes, OffPredictor, SubsetKey};
use crate::dataset::{LabeledDataset, Schema};
use crate::error::{OffError, Result};
use crate::glm::FitConfig;
use crate::learner::{LogisticLearner, SubsetLearner, SubsetModel};

/// Baseline derived from conditional statistical parity (single optional
/// feature): non-disclosers get `E[Y | b, A=1]`, disclosers `E[Y | b, A=1, z]`.
/// Both models are trained on disclosers only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspModel {
    pub schema: Schema,
    /// Providers, base features only.
    pub providers_base: SubsetModel,
    /// Providers, base features plus the optional feature.
    pub providers_full: SubsetModel,
}

impl CspModel {
    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.schema.n_base(), 1, b, a, z)?;
        if a[0] {
            let mut x = b.to_vec();
            x.push(z[0]);
            Ok(self.providers_full.predict_row(&x))
        } else {
            Ok(self.providers_base.predict_row(b))
        }
    }
}

impl OffPredictor for CspModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        CspModel::predict(self, b, a, z)
    }
}

pub fn fit_csp(ds: &LabeledDataset, cfg: &FitConfig) -> Result<CspModel> {
    fit_csp_with(ds, &LogisticLearner::new(*cfg))
}

pub fn fit_csp_with(ds: &LabeledDataset, learner: &dyn SubsetLearner) -> Result<CspModel> {
    if ds.n_optional() != 1 {
        return Err(OffError::InvalidParameter(format!(
            "the CSP baseline needs exactly one optional feature, got {}",
            ds.n_optional()
        )));
    }
    let providers_key = SubsetKey::full(1);
    let rows = ds.rows_with_superset(providers_key);
    let insufficient = || OffError::InsufficientSubset {
        key: providers_key,
        rows: rows.len(),
    };
    if rows.len() < learner.min_rows() {
        return Err(insufficient());
    }
    let y: Vec<u8> = rows.iter().map(|&j| ds.labels()[j]).collect();
    let w: Option<Vec<f64>> = ds.weights().map(|w| rows.iter().map(|&j| w[j]).collect());
    let fit = |key: SubsetKey| {
        learner
            .fit(&ds.design_for_subset(&rows, key), &y, w.as_deref())
            .map_err(|e| match e {
                OffError::DegenerateLabels | OffError::EmptyDataset => insufficient(),
                other => other,
            })
    };
    Ok(CspModel {
        schema: ds.schema().clone(),
        providers_base: fit(SubsetKey::empty(1))?,
        providers_full: fit(providers_key)?,
    })
}
