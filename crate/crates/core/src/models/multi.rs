use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_shapes, OffPredictor, SubsetKey};
use crate::dataset::{LabeledDataset, Schema};
use crate::error::{OffError, Result};
use crate::glm::FitConfig;
use crate::learner::{LogisticLearner, SubsetLearner, SubsetModel};

/// Submodel serving one availability pattern. `source` differs from the
/// pattern's own key when the pattern fell back to a smaller fittable subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiEntry {
    pub source: SubsetKey,
    pub model: SubsetModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<String>,
}

/// One fitted predictor per availability subset, dispatched on `I(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiModel {
    pub schema: Schema,
    pub learner: String,
    pub submodels: BTreeMap<SubsetKey, MultiEntry>,
    /// Learner invocations spent during fitting.
    pub fits: usize,
}

impl MultiModel {
    pub fn n_optional(&self) -> usize {
        self.schema.n_optional()
    }

    /// Patterns that are served by a fallback model.
    pub fn fallbacks(&self) -> impl Iterator<Item = (&SubsetKey, &MultiEntry)> {
        self.submodels.iter().filter(|(k, e)| **k != e.source)
    }

    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.schema.n_base(), self.n_optional(), b, a, z)?;
        let key = SubsetKey::from_mask(a);
        let entry = self.submodels.get(&key).ok_or(OffError::UnknownSubset(key))?;
        let mut x = Vec::with_capacity(b.len() + entry.source.len());
        x.extend_from_slice(b);
        x.extend(entry.source.indices().map(|i| z[i]));
        Ok(entry.model.predict_row(&x))
    }
}

impl OffPredictor for MultiModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        MultiModel::predict(self, b, a, z)
    }
}

/// Multi model with logistic submodels.
pub fn fit_multi(ds: &LabeledDataset, cfg: &FitConfig) -> Result<MultiModel> {
    fit_multi_with(ds, &LogisticLearner::new(*cfg))
}

/// Fits one model per subset `I ⊆ [r]` on every row whose available set
/// contains `I`, using the columns `[base | z_I]` only.
///
/// A subset without enough data is served by the largest fittable proper
/// subset (ties: drop the highest-index feature first); the substitution is
/// recorded in the entry. Fails only if the empty subset itself is unfittable.
pub fn fit_multi_with(ds: &LabeledDataset, learner: &dyn SubsetLearner) -> Result<MultiModel> {
    let r = ds.n_optional();
    let keys: Vec<SubsetKey> = SubsetKey::all(r).collect();
    let fits = AtomicUsize::new(0);
    let results: Vec<Result<SubsetModel>> = keys
        .par_iter()
        .map(|&key| {
            let rows = ds.rows_with_superset(key);
            if rows.len() < learner.min_rows() {
                return Err(OffError::InsufficientSubset { key, rows: rows.len() });
            }
            let x = ds.design_for_subset(&rows, key);
            let y: Vec<u8> = rows.iter().map(|&j| ds.labels()[j]).collect();
            let w: Option<Vec<f64>> = ds.weights().map(|w| rows.iter().map(|&j| w[j]).collect());
            fits.fetch_add(1, Ordering::Relaxed);
            learner.fit(&x, &y, w.as_deref()).map_err(|e| match e {
                OffError::DegenerateLabels | OffError::EmptyDataset | OffError::Singular => {
                    OffError::InsufficientSubset { key, rows: rows.len() }
                }
                other => other,
            })
        })
        .collect();
    if let Some(pos) = results
        .iter()
        .position(|res| matches!(res, Err(e) if !matches!(e, OffError::InsufficientSubset { .. })))
    {
        return Err(results.into_iter().nth(pos).unwrap().unwrap_err());
    }

    let fitted: BTreeMap<SubsetKey, &SubsetModel> = keys
        .iter()
        .zip(&results)
        .filter_map(|(k, res)| res.as_ref().ok().map(|m| (*k, m)))
        .collect();

    let mut submodels = BTreeMap::new();
    for (key, res) in keys.iter().zip(&results) {
        let entry = match res {
            Ok(model) => MultiEntry {
                source: *key,
                model: model.clone(),
                fallback_reason: None,
            },
            Err(e) => {
                let rows = match e {
                    OffError::InsufficientSubset { rows, .. } => rows,
                    _ => unreachable!(),
                };
                let source = key
                    .proper_subsets_by_preference()
                    .into_iter()
                    .find(|k| fitted.contains_key(k))
                    .ok_or(OffError::InsufficientSubset { key: *key, rows: *rows })?;
                MultiEntry {
                    source,
                    model: fitted[&source].clone(),
                    fallback_reason: Some(format!("{rows} rows or a single class")),
                }
            }
        };
        submodels.insert(*key, entry);
    }
    Ok(MultiModel {
        schema: ds.schema().clone(),
        learner: learner.name().to_owned(),
        submodels,
        fits: fits.into_inner(),
    })
}

pub fn predict_multi(m: &MultiModel, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
    m.predict(b, a, z)
}
