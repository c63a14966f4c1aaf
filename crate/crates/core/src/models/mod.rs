//! Estimators that respect optional features, the unfair baselines they are
//! compared against, and an exact conditional-expectation oracle.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::LabeledDataset;
use crate::error::{OffError, Result};

mod baseline;
mod csp;
mod multi;
mod naive_bayes;
mod off_lr;
mod oracle;

pub use baseline::{fit_base, fit_base_with, fit_imputed, fit_imputed_with, BaseModel, ImputedModel};
pub use csp::{fit_csp, fit_csp_with, CspModel};
pub use multi::{fit_multi, fit_multi_with, predict_multi, MultiEntry, MultiModel};
pub use naive_bayes::{fit_nb_off, predict_nb_off, NbOffModel};
pub use off_lr::{fit_off_lr, fit_off_lr_with, predict_off_lr, OffLrModel, OptionalTerm};
pub use oracle::{brute_force_off, Atom, FiniteDistribution};

/// Index set `I ⊆ [r]` of available optional features.
///
/// Serialized as a bit string where character `i` is feature `i`
/// (`"101"`: features 1 and 3 present).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetKey {
    bits: u64,
    width: u8,
}

impl SubsetKey {
    pub const MAX_WIDTH: usize = 63;

    pub fn empty(width: usize) -> Self {
        assert!(width <= Self::MAX_WIDTH, "at most {} optional features", Self::MAX_WIDTH);
        Self { bits: 0, width: width as u8 }
    }

    pub fn full(width: usize) -> Self {
        let mut k = Self::empty(width);
        k.bits = (1u64 << width) - 1;
        k
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        let mut key = Self::empty(mask.len());
        for (i, &a) in mask.iter().enumerate() {
            if a {
                key.bits |= 1 << i;
            }
        }
        key
    }

    pub fn from_indices(width: usize, indices: &[usize]) -> Self {
        let mut key = Self::empty(width);
        for &i in indices {
            assert!(i < width);
            key.bits |= 1 << i;
        }
        key
    }

    /// All `2^width` subsets in canonical (integer) order.
    pub fn all(width: usize) -> impl Iterator<Item = SubsetKey> {
        assert!(width <= 20, "enumerating 2^{width} subsets is not supported");
        (0..1u64 << width).map(move |bits| SubsetKey { bits, width: width as u8 })
    }

    pub fn width(&self) -> usize {
        usize::from(self.width)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.width() && self.bits & (1 << i) != 0
    }

    pub fn is_subset_of(&self, other: SubsetKey) -> bool {
        self.bits & !other.bits == 0
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width()).filter(move |&i| self.contains(i))
    }

    pub fn to_mask(&self) -> Vec<bool> {
        (0..self.width()).map(|i| self.contains(i)).collect()
    }

    /// Every proper subset, largest first; within one size, subsets that drop
    /// higher-index features come first.
    pub fn proper_subsets_by_preference(&self) -> Vec<SubsetKey> {
        let members: Vec<usize> = self.indices().collect();
        let mut out: Vec<(SubsetKey, Vec<usize>)> = (0..(1u64 << members.len()) - 1)
            .map(|sel| {
                let mut key = SubsetKey::empty(self.width());
                let mut removed = Vec::new();
                for (p, &i) in members.iter().enumerate() {
                    if sel & (1 << p) != 0 {
                        key.bits |= 1 << i;
                    } else {
                        removed.push(i);
                    }
                }
                removed.reverse();
                (key, removed)
            })
            .collect();
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| b.1.cmp(&a.1)));
        out.into_iter().map(|(k, _)| k).collect()
    }
}

impl fmt::Display for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 0 {
            return f.write_str("∅");
        }
        for i in 0..self.width() {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SubsetKey {
    type Err = OffError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "∅" || s.is_empty() {
            return Ok(SubsetKey::empty(0));
        }
        let mask = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(OffError::InvalidParameter(format!("bad subset key `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if mask.len() > Self::MAX_WIDTH {
            return Err(OffError::InvalidParameter(format!("subset key `{s}` too wide")));
        }
        Ok(SubsetKey::from_mask(&mask))
    }
}

impl Serialize for SubsetKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubsetKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Scores one observation `(b, a, z*)`; `z` has length `r` and its entries
/// where `a_i = 0` must be ignored.
pub trait OffPredictor: Sync {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64>;
}

impl<T: OffPredictor + ?Sized> OffPredictor for &T {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        (**self).predict(b, a, z)
    }
}

/// Adapts a closure to [`OffPredictor`].
pub struct FnPredictor<F>(pub F);

impl<F> OffPredictor for FnPredictor<F>
where
    F: Fn(&[f64], &[bool], &[f64]) -> f64 + Sync,
{
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        Ok((self.0)(b, a, z))
    }
}

/// Scores every row of `ds`.
pub fn predict_dataset(model: &dyn OffPredictor, ds: &LabeledDataset) -> Result<Vec<f64>> {
    (0..ds.len())
        .map(|j| model.predict(&ds.base_row(j), ds.mask_row(j), &ds.optional_row(j)))
        .collect()
}

pub(crate) fn check_shapes(n: usize, r: usize, b: &[f64], a: &[bool], z: &[f64]) -> Result<()> {
    for (expected, got) in [(n, b.len()), (r, a.len()), (r, z.len())] {
        if expected != got {
            return Err(OffError::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// Any fitted model, tagged for JSON with `"model_type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum FittedModel {
    Multi(MultiModel),
    OffLr(OffLrModel),
    NbOff(NbOffModel),
    Csp(CspModel),
    Base(BaseModel),
    Imputed(ImputedModel),
}

impl FittedModel {
    pub fn schema(&self) -> &crate::dataset::Schema {
        match self {
            FittedModel::Multi(m) => &m.schema,
            FittedModel::OffLr(m) => &m.schema,
            FittedModel::NbOff(m) => &m.schema,
            FittedModel::Csp(m) => &m.schema,
            FittedModel::Base(m) => &m.schema,
            FittedModel::Imputed(m) => &m.schema,
        }
    }

    /// Primitive fits spent producing this model.
    pub fn fits(&self) -> usize {
        match self {
            FittedModel::Multi(m) => m.fits,
            FittedModel::OffLr(m) => m.fits,
            FittedModel::NbOff(_) => 1,
            FittedModel::Csp(_) => 2,
            FittedModel::Base(_) | FittedModel::Imputed(_) => 1,
        }
    }
}

impl OffPredictor for FittedModel {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Multi(m) => m.predict(b, a, z),
            FittedModel::OffLr(m) => m.predict(b, a, z),
            FittedModel::NbOff(m) => m.predict(b, a, z),
            FittedModel::Csp(m) => m.predict(b, a, z),
            FittedModel::Base(m) => m.predict(b, a, z),
            FittedModel::Imputed(m) => m.predict(b, a, z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_roundtrip_and_order() {
        let k = SubsetKey::from_mask(&[true, false, true]);
        assert_eq!(k.to_string(), "101");
        assert_eq!("101".parse::<SubsetKey>().unwrap(), k);
        assert_eq!(k.indices().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(SubsetKey::all(3).count(), 8);
        assert!(SubsetKey::from_indices(3, &[2]).is_subset_of(k));
        assert!(!SubsetKey::from_indices(3, &[1]).is_subset_of(k));
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, "\"101\"");
    }

    #[test]
    fn fallback_preference_drops_highest_index_first() {
        let k = SubsetKey::full(3);
        let order: Vec<String> = k.proper_subsets_by_preference().iter().map(|k| k.to_string()).collect();
        assert_eq!(order, vec!["110", "101", "011", "100", "010", "001", "000"]);
    }
}
