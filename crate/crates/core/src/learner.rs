//! Pluggable fitting contract for subset models.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{OffError, Result};
use crate::glm::{fit_logistic, FitConfig, LogisticParams};

/// A fitted predictor over a plain feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetModel {
    Logistic(LogisticParams),
    GroupMean(GroupMeanModel),
}

impl SubsetModel {
    /// Probability of the positive class. Panics on a width mismatch, which
    /// callers rule out by construction.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            SubsetModel::Logistic(p) => p.predict_row(x).expect("input width matches the fitted model"),
            SubsetModel::GroupMean(g) => g.predict_row(x),
        }
    }

    pub fn as_logistic(&self) -> Option<&LogisticParams> {
        match self {
            SubsetModel::Logistic(p) => Some(p),
            SubsetModel::GroupMean(_) => None,
        }
    }

    /// Number of stored scalars.
    pub fn n_params(&self) -> usize {
        match self {
            SubsetModel::Logistic(p) => p.dim() + 1,
            SubsetModel::GroupMean(g) => g.groups.len() * (g.width + 1) + 1,
        }
    }
}

/// Anything that can fit a [`SubsetModel`] from a design matrix.
pub trait SubsetLearner: Sync {
    fn name(&self) -> &'static str;

    /// Fewest rows a fit may use.
    fn min_rows(&self) -> usize;

    fn fit(&self, x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<SubsetModel>;
}

impl<T: SubsetLearner + ?Sized> SubsetLearner for &T {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn min_rows(&self) -> usize {
        (**self).min_rows()
    }

    fn fit(&self, x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<SubsetModel> {
        (**self).fit(x, y, weights)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLearner {
    pub cfg: FitConfig,
}

impl LogisticLearner {
    pub fn new(cfg: FitConfig) -> Self {
        Self { cfg }
    }
}

impl SubsetLearner for LogisticLearner {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn min_rows(&self) -> usize {
        2
    }

    fn fit(&self, x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<SubsetModel> {
        Ok(SubsetModel::Logistic(fit_logistic(x, y, weights, &self.cfg)?.params))
    }
}

/// One group of identical feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub key: Vec<f64>,
    pub mean: f64,
    pub weight: f64,
}

/// Empirical (weighted) label mean per distinct feature vector: the
/// squared-loss minimiser over an unrestricted function class.
///
/// Inputs never seen during fitting receive the overall mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeanModel {
    pub width: usize,
    pub groups: Vec<Group>,
    pub overall_mean: f64,
}

fn cmp_keys(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

impl GroupMeanModel {
    pub fn fit(x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<Self> {
        let mut rows: Vec<(Vec<f64>, f64, f64)> = (0..x.nrows())
            .map(|j| {
                let w = weights.map_or(1.0, |w| w[j]);
                (x.row(j).iter().copied().collect(), w, f64::from(y[j]))
            })
            .filter(|(_, w, _)| *w > 0.0)
            .collect();
        if rows.is_empty() {
            return Err(OffError::EmptyDataset);
        }
        rows.sort_by(|a, b| cmp_keys(&a.0, &b.0));
        let mut groups: Vec<Group> = Vec::new();
        let (mut total_w, mut total_wy) = (0.0, 0.0);
        let mut acc: Option<(Vec<f64>, f64, f64)> = None;
        for (key, w, yv) in rows {
            total_w += w;
            total_wy += w * yv;
            match &mut acc {
                Some((k, sw, swy)) if cmp_keys(k, &key).is_eq() => {
                    *sw += w;
                    *swy += w * yv;
                }
                _ => {
                    if let Some((k, sw, swy)) = acc.take() {
                        groups.push(Group { key: k, mean: swy / sw, weight: sw });
                    }
                    acc = Some((key, w, w * yv));
                }
            }
        }
        if let Some((k, sw, swy)) = acc {
            groups.push(Group { key: k, mean: swy / sw, weight: sw });
        }
        Ok(Self {
            width: x.ncols(),
            groups,
            overall_mean: total_wy / total_w,
        })
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.groups.binary_search_by(|g| cmp_keys(&g.key, x)) {
            Ok(i) => self.groups[i].mean,
            Err(_) => self.overall_mean,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GroupMeanLearner;

impl SubsetLearner for GroupMeanLearner {
    fn name(&self) -> &'static str {
        "group_mean"
    }

    fn min_rows(&self) -> usize {
        1
    }

    fn fit(&self, x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<SubsetModel> {
        Ok(SubsetModel::GroupMean(GroupMeanModel::fit(x, y, weights)?))
    }
}

/// Wraps a learner and counts every fit call.
#[derive(Debug, Default)]
pub struct CountingLearner<L> {
    inner: L,
    count: AtomicUsize,
}

impl<L: SubsetLearner> CountingLearner<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(AtomicOrdering::SeqCst)
    }
}

impl<L: SubsetLearner> SubsetLearner for CountingLearner<L> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn min_rows(&self) -> usize {
        self.inner.min_rows()
    }

    fn fit(&self, x: &DMatrix<f64>, y: &[u8], weights: Option<&[f64]>) -> Result<SubsetModel> {
        self.count.fetch_add(1, AtomicOrdering::SeqCst);
        self.inner.fit(x, y, weights)
    }
}
