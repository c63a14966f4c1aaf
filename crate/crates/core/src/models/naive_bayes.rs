use serde::{Deserialize, Serialize};

use super::{check_shapes, OffPredictor};
use crate::dataset::{LabeledDataset, Schema};
use crate::error::{OffError, Result};
use crate::glm::sigmoid;

/// Naive Bayes over binary features with independent availability.
///
/// The odds factorise over base features and over disclosed optional
/// features only, so `2n + 2r` log-ratios (plus the prior) cover every
/// availability pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbOffModel {
    pub schema: Schema,
    pub prior_log_odds: f64,
    /// `log p(b_i = v | Y=1) / p(b_i = v | Y=0)` for v = 0, 1.
    pub base_ratios: Vec<[f64; 2]>,
    /// `log p(z_i = v, A_i = 1 | Y=1) / p(z_i = v, A_i = 1 | Y=0)` for v = 0, 1.
    pub optional_ratios: Vec<[f64; 2]>,
    pub alpha: f64,
}

impl NbOffModel {
    pub fn n_ratio_params(&self) -> usize {
        2 * self.base_ratios.len() + 2 * self.optional_ratios.len()
    }

    pub fn log_odds(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.base_ratios.len(), self.optional_ratios.len(), b, a, z)?;
        let mut eta = self.prior_log_odds;
        for (i, &v) in b.iter().enumerate() {
            eta += self.base_ratios[i][binary(v, &self.schema.base_names[i])?];
        }
        for (i, &v) in z.iter().enumerate() {
            if a[i] {
                eta += self.optional_ratios[i][binary(v, &self.schema.optional_names[i])?];
            }
        }
        Ok(eta)
    }

    pub fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        self.log_odds(b, a, z).map(sigmoid)
    }
}

impl OffPredictor for NbOffModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        NbOffModel::predict(self, b, a, z)
    }
}

fn binary(v: f64, name: &str) -> Result<usize> {
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(OffError::NonBinaryFeature(name.to_owned()))
    }
}

fn log_ratio(num: f64, den: f64) -> f64 {
    if num == den {
        0.0
    } else {
        num.ln() - den.ln()
    }
}

/// Estimates the log-ratios from (weighted) frequency counts with `alpha`
/// added to every cell. Optional counts use the joint event
/// `(z_i = v, A_i = 1)` within each class, normalised by the class mass, so
/// each optional feature has three cells: v = 0, v = 1 and unavailable.
pub fn fit_nb_off(ds: &LabeledDataset, alpha: f64) -> Result<NbOffModel> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(OffError::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let (n, r) = (ds.n_base(), ds.n_optional());
    let schema = ds.schema();
    let mut class_mass = [0.0f64; 2];
    let mut base_counts = vec![[[0.0f64; 2]; 2]; n];
    let mut opt_counts = vec![[[0.0f64; 2]; 2]; r];
    for j in 0..ds.len() {
        let y = usize::from(ds.labels()[j]);
        let w = ds.weight(j);
        class_mass[y] += w;
        for (i, counts) in base_counts.iter_mut().enumerate() {
            let v = binary(ds.base()[(j, i)], &schema.base_names[i])?;
            counts[y][v] += w;
        }
        for (i, counts) in opt_counts.iter_mut().enumerate() {
            if ds.mask().get(j, i) {
                let v = binary(ds.optional_values()[(j, i)], &schema.optional_names[i])?;
                counts[y][v] += w;
            }
        }
    }
    if class_mass[0] <= 0.0 || class_mass[1] <= 0.0 {
        return Err(OffError::DegenerateLabels);
    }
    let ratios = |counts: &[[[f64; 2]; 2]], cells: f64| -> Vec<[f64; 2]> {
        counts
            .iter()
            .map(|c| {
                let p = |y: usize, v: usize| (c[y][v] + alpha) / (class_mass[y] + cells * alpha);
                [log_ratio(p(1, 0), p(0, 0)), log_ratio(p(1, 1), p(0, 1))]
            })
            .collect()
    };
    Ok(NbOffModel {
        schema: schema.clone(),
        prior_log_odds: log_ratio(class_mass[1] + alpha, class_mass[0] + alpha),
        base_ratios: ratios(&base_counts, 2.0),
        optional_ratios: ratios(&opt_counts, 3.0),
        alpha,
    })
}

pub fn predict_nb_off(m: &NbOffModel, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
    m.predict(b, a, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn schema(n: usize, r: usize) -> Schema {
        Schema::new((0..n).map(|i| format!("b{i}")), (0..r).map(|i| format!("z{i}")), "y").unwrap()
    }

    #[test]
    fn symmetric_counts_give_one_half() {
        // every row appears once with each label
        let rows: Vec<[f64; 3]> = vec![[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let mut base = Vec::new();
        let mut opt = Vec::new();
        let mut labels = Vec::new();
        for y in [0u8, 1] {
            for r in &rows {
                base.extend_from_slice(&r[..2]);
                opt.push(r[2]);
                labels.push(y);
            }
        }
        let ds = LabeledDataset::fully_available(
            schema(2, 1),
            DMatrix::from_row_slice(6, 2, &base),
            DMatrix::from_row_slice(6, 1, &opt),
            labels,
        )
        .unwrap();
        let m = fit_nb_off(&ds, 1.0).unwrap();
        for b0 in [0.0, 1.0] {
            for z in [0.0, 1.0] {
                assert_eq!(m.predict(&[b0, 1.0], &[true], &[z]).unwrap(), 0.5);
                assert_eq!(m.predict(&[b0, 0.0], &[false], &[f64::NAN]).unwrap(), 0.5);
            }
        }
    }

    #[test]
    fn ratio_count_is_2n_plus_2r() {
        let n = 4;
        let r = 3;
        let ds = LabeledDataset::fully_available(
            schema(n, r),
            DMatrix::from_fn(8, n, |j, c| ((j + c) % 2) as f64),
            DMatrix::from_fn(8, r, |j, c| ((j * c) % 2) as f64),
            (0..8).map(|j| (j % 2) as u8).collect(),
        )
        .unwrap();
        let m = fit_nb_off(&ds, 1.0).unwrap();
        assert_eq!(m.n_ratio_params(), 14);
    }

    #[test]
    fn rejects_non_binary() {
        let ds = LabeledDataset::fully_available(
            schema(1, 0),
            DMatrix::from_row_slice(2, 1, &[0.0, 2.0]),
            DMatrix::zeros(2, 0),
            vec![0, 1],
        )
        .unwrap();
        assert!(matches!(fit_nb_off(&ds, 1.0), Err(OffError::NonBinaryFeature(c)) if c == "b0"));
    }

    #[test]
    fn absent_features_contribute_nothing() {
        let m = NbOffModel {
            schema: schema(1, 1),
            prior_log_odds: 0.0,
            base_ratios: vec![[0.0, 0.0]],
            optional_ratios: vec![[3.0, -3.0]],
            alpha: 1.0,
        };
        assert_eq!(m.predict(&[1.0], &[false], &[f64::NAN]).unwrap(), 0.5);
        assert!(m.predict(&[1.0], &[true], &[0.0]).unwrap() > 0.9);
    }
}
