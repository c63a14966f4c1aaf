use serde::{Deserialize, Serialize};

use super::{check_shapes, OffPredictor};
use crate::dataset::{drop_optional, impute_zero, LabeledDataset, Schema};
use crate::error::Result;
use crate::glm::FitConfig;
use crate::learner::{LogisticLearner, SubsetLearner, SubsetModel};

/// Model on base features only; optional inputs are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub schema: Schema,
    pub model: SubsetModel,
}

impl BaseModel {
    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.schema.n_base(), self.schema.n_optional(), b, a, z)?;
        Ok(self.model.predict_row(b))
    }
}

impl OffPredictor for BaseModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        BaseModel::predict(self, b, a, z)
    }
}

/// Single model on zero-filled optional values, optionally with the
/// availability bits as extra inputs. Uses availability as a signal, so it
/// does not respect optional-feature fairness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedModel {
    pub schema: Schema,
    pub add_indicator: bool,
    pub model: SubsetModel,
}

impl ImputedModel {
    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.schema.n_base(), self.schema.n_optional(), b, a, z)?;
        let mut x = b.to_vec();
        x.extend(a.iter().zip(z).map(|(&ai, &zi)| if ai { zi } else { 0.0 }));
        if self.add_indicator {
            x.extend(a.iter().map(|&ai| f64::from(u8::from(ai))));
        }
        Ok(self.model.predict_row(&x))
    }
}

impl OffPredictor for ImputedModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        ImputedModel::predict(self, b, a, z)
    }
}

pub fn fit_base(ds: &LabeledDataset, cfg: &FitConfig) -> Result<BaseModel> {
    fit_base_with(ds, &LogisticLearner::new(*cfg))
}

pub fn fit_base_with(ds: &LabeledDataset, learner: &dyn SubsetLearner) -> Result<BaseModel> {
    Ok(BaseModel {
        schema: ds.schema().clone(),
        model: learner.fit(&drop_optional(ds), ds.labels(), ds.weights())?,
    })
}

pub fn fit_imputed(ds: &LabeledDataset, cfg: &FitConfig, add_indicator: bool) -> Result<ImputedModel> {
    fit_imputed_with(ds, &LogisticLearner::new(*cfg), add_indicator)
}

pub fn fit_imputed_with(ds: &LabeledDataset, learner: &dyn SubsetLearner, add_indicator: bool) -> Result<ImputedModel> {
    Ok(ImputedModel {
        schema: ds.schema().clone(),
        add_indicator,
        model: learner.fit(&impute_zero(ds, add_indicator), ds.labels(), ds.weights())?,
    })
}
