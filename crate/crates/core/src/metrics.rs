//! Evaluation quantities. Sums use pairwise summation in a fixed order so
//! results do not depend on how work was scheduled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{OffError, Result};
use crate::models::{predict_dataset, OffPredictor};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    (pairwise_sum(&sq) / (xs.len() - 1) as f64).sqrt()
}

fn nonempty(ds: &LabeledDataset) -> Result<()> {
    if ds.is_empty() {
        Err(OffError::EmptyDataset)
    } else {
        Ok(())
    }
}

/// Mean absolute difference between two predictors over the rows of `ds`.
pub fn off_gap(f: &dyn OffPredictor, reference: &dyn OffPredictor, ds: &LabeledDataset) -> Result<f64> {
    nonempty(ds)?;
    let a = predict_dataset(f, ds)?;
    let b = predict_dataset(reference, ds)?;
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    Ok(mean(&diffs))
}

/// Share of rows where `f ≥ threshold` disagrees with the label. Scores
/// exactly at the threshold count as positive.
pub fn misclassification(f: &dyn OffPredictor, ds: &LabeledDataset, threshold: f64) -> Result<f64> {
    nonempty(ds)?;
    let scores = predict_dataset(f, ds)?;
    Ok(misclassification_from_scores(&scores, ds.labels(), threshold))
}

pub fn misclassification_from_scores(scores: &[f64], labels: &[u8], threshold: f64) -> f64 {
    let wrong = scores
        .iter()
        .zip(labels)
        .filter(|(s, y)| u8::from(**s >= threshold) != **y)
        .count();
    wrong as f64 / scores.len() as f64
}

/// Area under the ROC curve as the Mann–Whitney statistic, ties counted half
/// (midranks).
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(OffError::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(OffError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut k = i;
        while k + 1 < order.len() && scores[order[k + 1]] == scores[order[i]] {
            k += 1;
        }
        // ranks are 1-based: i+1 ..= k+1
        let midrank = (i + k) as f64 / 2.0 + 1.0;
        let pos_in_tie = order[i..=k].iter().filter(|&&j| labels[j] == 1).count();
        pos_rank_sum += midrank * pos_in_tie as f64;
        i = k + 1;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean squared error of probabilities against 0/1 labels.
pub fn mse(f: &dyn OffPredictor, ds: &LabeledDataset) -> Result<f64> {
    nonempty(ds)?;
    let scores = predict_dataset(f, ds)?;
    let sq: Vec<f64> = scores
        .iter()
        .zip(ds.labels())
        .map(|(p, &y)| (p - f64::from(y)).powi(2))
        .collect();
    Ok(mean(&sq))
}

/// Average unfavourable-outcome score of two models over the rows that
/// disclosed no optional feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenalizationGap {
    pub avg_imputed: f64,
    pub avg_base: f64,
    /// `avg_base − avg_imputed`; negative means non-disclosers are penalized.
    pub change: f64,
    pub rows: usize,
}

/// Compares models on rows with no available optional feature.
/// `unfavorable_label` picks which class counts as the negative outcome.
pub fn non_penalization_gap(
    f_imputed: &dyn OffPredictor,
    f_base: &dyn OffPredictor,
    ds: &LabeledDataset,
    unfavorable_label: u8,
) -> Result<PenalizationGap> {
    let rows: Vec<usize> = (0..ds.len()).filter(|&j| ds.mask_row(j).iter().all(|a| !a)).collect();
    if rows.is_empty() || ds.n_optional() == 0 {
        return Err(OffError::NoMissingRows);
    }
    let subset = ds.select_rows(&rows);
    let unfavourable = |scores: Vec<f64>| -> Vec<f64> {
        scores
            .into_iter()
            .map(|p| if unfavorable_label == 1 { p } else { 1.0 - p })
            .collect()
    };
    let avg_imputed = mean(&unfavourable(predict_dataset(f_imputed, &subset)?));
    let avg_base = mean(&unfavourable(predict_dataset(f_base, &subset)?));
    Ok(PenalizationGap {
        avg_imputed,
        avg_base,
        change: avg_base - avg_imputed,
        rows: rows.len(),
    })
}

/// Renders a rate as a percentage with two decimals.
pub const LONG_CSV_HEADER: &str = "size,seed,model,metric,value";

pub fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

/// Named metric values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: BTreeMap<String, MetricValue>,
}

impl EvalReport {
    pub fn insert(&mut self, name: impl Into<String>, value: f64, n: usize, stderr: Option<f64>) {
        self.metrics.insert(name.into(), MetricValue { value, n, stderr });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).map(|m| m.value)
    }

    /// Rows in the long report layout, one per metric.
    pub fn to_csv_rows(&self, size: usize, seed: u64, model: &str) -> String {
        self.metrics
            .iter()
            .map(|(name, m)| format!("{size},{seed},{model},{name},{}\n", m.value))
            .collect()
    }
}

/// Misclassification, MSE and (when both classes occur) AUC of `model` on `ds`.
pub fn evaluate(model: &dyn OffPredictor, ds: &LabeledDataset) -> Result<EvalReport> {
    nonempty(ds)?;
    let n = ds.len();
    let scores = predict_dataset(model, ds)?;
    let labels = ds.labels();
    let mut report = EvalReport::default();
    let err = misclassification_from_scores(&scores, labels, 0.5);
    report.insert("misclassification", err, n, Some((err * (1.0 - err) / n as f64).sqrt()));
    let sq: Vec<f64> = scores.iter().zip(labels).map(|(p, &y)| (p - f64::from(y)).powi(2)).collect();
    report.insert("mse", mean(&sq), n, Some(sample_std(&sq) / (n as f64).sqrt()));
    if let Ok(a) = auc(&scores, labels) {
        report.insert("auc", a, n, None);
    }
    Ok(report)
}
