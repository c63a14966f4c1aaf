//! Tabular data with base features, optional features and an availability mask.
//!
//! Unavailable optional values are stored as `NaN`. Legal values are always
//! finite, so the sentinel can never collide with real data; the mask stays the
//! authoritative record of availability.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OffError, Result};
use crate::glm::sigmoid;
use crate::learner::SubsetLearner;
use crate::models::SubsetKey;

/// Sentinel for an unavailable optional value.
pub const NA: f64 = f64::NAN;

/// Default textual token for unavailable cells in CSV files.
pub const DEFAULT_NA_TOKEN: &str = "N/A";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub base_names: Vec<String>,
    pub optional_names: Vec<String>,
    pub label_name: String,
}

impl Schema {
    pub fn new<S: Into<String>, T: Into<String>>(
        base_names: impl IntoIterator<Item = S>,
        optional_names: impl IntoIterator<Item = T>,
        label_name: impl Into<String>,
    ) -> Result<Self> {
        let schema = Self {
            base_names: base_names.into_iter().map(Into::into).collect(),
            optional_names: optional_names.into_iter().map(Into::into).collect(),
            label_name: label_name.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_names.is_empty() && self.optional_names.is_empty() {
            return Err(OffError::InvalidSchema(
                "at least one base or optional feature is required".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in self.all_names() {
            if !seen.insert(name) {
                return Err(OffError::InvalidSchema(format!("duplicate column name `{name}`")));
            }
        }
        Ok(())
    }

    /// Number of base features (`n`).
    pub fn n_base(&self) -> usize {
        self.base_names.len()
    }

    /// Number of optional features (`r`).
    pub fn n_optional(&self) -> usize {
        self.optional_names.len()
    }

    fn all_names(&self) -> impl Iterator<Item = &str> {
        self.base_names
            .iter()
            .chain(&self.optional_names)
            .map(String::as_str)
            .chain(std::iter::once(self.label_name.as_str()))
    }

    pub fn optional_index(&self, name: &str) -> Option<usize> {
        self.optional_names.iter().position(|n| n == name)
    }
}

/// N × r availability bits, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl AvailabilityMask {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(OffError::DimensionMismatch {
                expected: rows * cols,
                got: bits.len(),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![true; rows * cols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }

    /// Index set `I(a)` of the available features in `row`.
    pub fn subset(&self, row: usize) -> SubsetKey {
        SubsetKey::from_mask(self.row(row))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = bool> + '_ {
        (0..self.rows).map(move |j| self.get(j, col))
    }
}

/// Base block, optional block (with `NaN` where unavailable), mask and binary labels.
///
/// Optional per-row weights turn the dataset into a weighted empirical
/// distribution; every fitter honours them.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    schema: Schema,
    base: DMatrix<f64>,
    optional: DMatrix<f64>,
    mask: AvailabilityMask,
    labels: Vec<u8>,
    weights: Option<Vec<f64>>,
}

/// Equality treats two sentinels as equal (bitwise comparison of values).
impl PartialEq for LabeledDataset {
    fn eq(&self, other: &Self) -> bool {
        let same_bits = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.schema == other.schema
            && same_bits(&self.base, &other.base)
            && same_bits(&self.optional, &other.optional)
            && self.mask == other.mask
            && self.labels == other.labels
            && self.weights == other.weights
    }
}

impl LabeledDataset {
    /// Builds a dataset and checks every invariant. Optional cells whose mask
    /// bit is 0 are overwritten with the sentinel.
    pub fn new(
        schema: Schema,
        base: DMatrix<f64>,
        mut optional: DMatrix<f64>,
        mask: AvailabilityMask,
        labels: Vec<u8>,
    ) -> Result<Self> {
        schema.validate()?;
        let n = labels.len();
        let dims = [
            (base.nrows(), n),
            (optional.nrows(), n),
            (mask.nrows(), n),
            (base.ncols(), schema.n_base()),
            (optional.ncols(), schema.n_optional()),
            (mask.ncols(), schema.n_optional()),
        ];
        for (got, expected) in dims {
            if got != expected {
                return Err(OffError::DimensionMismatch { expected, got });
            }
        }
        if let Some(j) = labels.iter().position(|&y| y > 1) {
            return Err(OffError::InvalidParameter(format!("label at row {j} is not binary")));
        }
        for j in 0..n {
            for c in 0..base.ncols() {
                if !base[(j, c)].is_finite() {
                    return Err(OffError::NaInBaseFeature {
                        row: j,
                        col: schema.base_names[c].clone(),
                    });
                }
            }
            for c in 0..optional.ncols() {
                if mask.get(j, c) {
                    if !optional[(j, c)].is_finite() {
                        return Err(OffError::InvalidParameter(format!(
                            "available optional value at row {j}, column `{}` is not finite",
                            schema.optional_names[c]
                        )));
                    }
                } else {
                    optional[(j, c)] = NA;
                }
            }
        }
        Ok(Self {
            schema,
            base,
            optional,
            mask,
            labels,
            weights: None,
        })
    }

    /// A dataset with every optional value available.
    pub fn fully_available(
        schema: Schema,
        base: DMatrix<f64>,
        optional: DMatrix<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let mask = AvailabilityMask::full(labels.len(), schema.n_optional());
        Self::new(schema, base, optional, mask, labels)
    }

    /// Attaches nonnegative row weights.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(OffError::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(OffError::InvalidParameter("row weights must be finite and nonnegative".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_base(&self) -> usize {
        self.base.ncols()
    }

    pub fn n_optional(&self) -> usize {
        self.optional.ncols()
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn optional_values(&self) -> &DMatrix<f64> {
        &self.optional
    }

    pub fn mask(&self) -> &AvailabilityMask {
        &self.mask
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, row: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[row])
    }

    pub fn base_row(&self, row: usize) -> Vec<f64> {
        self.base.row(row).iter().copied().collect()
    }

    pub fn optional_row(&self, row: usize) -> Vec<f64> {
        self.optional.row(row).iter().copied().collect()
    }

    pub fn mask_row(&self, row: usize) -> &[bool] {
        self.mask.row(row)
    }

    /// Dataset restricted to `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let base = self.base.select_rows(rows.iter());
        let optional = self.optional.select_rows(rows.iter());
        let bits = rows.iter().flat_map(|&j| self.mask.row(j).iter().copied()).collect();
        Self {
            schema: self.schema.clone(),
            base,
            optional,
            mask: AvailabilityMask {
                rows: rows.len(),
                cols: self.mask.cols,
                bits,
            },
            labels: rows.iter().map(|&j| self.labels[j]).collect(),
            weights: self.weights.as_ref().map(|w| rows.iter().map(|&j| w[j]).collect()),
        }
    }

    /// Rows whose availability set contains every feature in `key`.
    pub fn rows_with_superset(&self, key: SubsetKey) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| key.is_subset_of(self.mask.subset(j)))
            .collect()
    }

    /// Design matrix `[base | z_I]` for the given rows.
    pub fn design_for_subset(&self, rows: &[usize], key: SubsetKey) -> DMatrix<f64> {
        let cols: Vec<usize> = key.indices().collect();
        let n = self.n_base();
        DMatrix::from_fn(rows.len(), n + cols.len(), |j, c| {
            if c < n {
                self.base[(rows[j], c)]
            } else {
                self.optional[(rows[j], cols[c - n])]
            }
        })
    }

    /// Re-partitions the feature columns: `optional` names become the optional
    /// block (in that order), every other feature becomes a base feature.
    /// Columns moved into the base block must be fully available.
    pub fn repartition(&self, optional: &[String]) -> Result<Self> {
        let mut columns: Vec<(String, Vec<f64>, Vec<bool>)> = Vec::new();
        for (c, name) in self.schema.base_names.iter().enumerate() {
            columns.push((name.clone(), self.base.column(c).iter().copied().collect(), vec![true; self.len()]));
        }
        for (c, name) in self.schema.optional_names.iter().enumerate() {
            columns.push((
                name.clone(),
                self.optional.column(c).iter().copied().collect(),
                self.mask.column(c).collect(),
            ));
        }
        for name in optional {
            if !columns.iter().any(|(n, _, _)| n == name) {
                return Err(OffError::UnknownFeature(name.clone()));
            }
        }
        let (opt_cols, base_cols): (Vec<_>, Vec<_>) =
            columns.into_iter().partition(|(n, _, _)| optional.contains(n));
        for (name, _, avail) in &base_cols {
            if avail.iter().any(|a| !a) {
                return Err(OffError::AlreadyMissing(name.clone()));
            }
        }
        let opt_cols: Vec<_> = optional
            .iter()
            .map(|name| opt_cols.iter().find(|(n, _, _)| n == name).unwrap().clone())
            .collect();
        let schema = Schema::new(
            base_cols.iter().map(|(n, _, _)| n.clone()),
            opt_cols.iter().map(|(n, _, _)| n.clone()),
            self.schema.label_name.clone(),
        )?;
        let n_rows = self.len();
        let base = DMatrix::from_fn(n_rows, base_cols.len(), |j, c| base_cols[c].1[j]);
        let opt = DMatrix::from_fn(n_rows, opt_cols.len(), |j, c| opt_cols[c].1[j]);
        let bits = (0..n_rows)
            .flat_map(|j| opt_cols.iter().map(move |col| col.2[j]))
            .collect();
        let mask = AvailabilityMask::new(n_rows, opt_cols.len(), bits)?;
        let mut ds = Self::new(schema, base, opt, mask, self.labels.clone())?;
        ds.weights = self.weights.clone();
        Ok(ds)
    }
}

// ---------------------------------------------------------------------------
// CSV

fn parse_label_column(raw: &[String]) -> Result<Vec<u8>> {
    let distinct: BTreeSet<&str> = raw.iter().map(String::as_str).collect();
    let numeric: Option<Vec<u8>> = raw
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        })
        .collect();
    if let Some(labels) = numeric {
        return Ok(labels);
    }
    if distinct.len() == 2 {
        // lexicographically larger value is the positive class ("Yes" > "No")
        let positive = *distinct.iter().next_back().unwrap();
        return Ok(raw.iter().map(|s| u8::from(s == positive)).collect());
    }
    Err(OffError::LabelNotBinary(distinct.into_iter().map(str::to_owned).collect()))
}

/// Reads a dataset from any CSV source. See [`load_csv`].
pub fn read_csv<R: Read>(reader: R, schema: &Schema, na_token: &str) -> Result<LabeledDataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| OffError::MissingColumn(name.to_owned()))
    };
    let base_idx: Vec<usize> = schema.base_names.iter().map(|n| find(n)).collect::<Result<_>>()?;
    let opt_idx: Vec<usize> = schema.optional_names.iter().map(|n| find(n)).collect::<Result<_>>()?;
    let label_idx = find(&schema.label_name)?;

    let (n, r) = (base_idx.len(), opt_idx.len());
    let mut base = Vec::new();
    let mut optional = Vec::new();
    let mut bits = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |idx: usize| record.get(idx).unwrap_or("");
        for (c, &idx) in base_idx.iter().enumerate() {
            let text = cell(idx);
            if text == na_token || text.is_empty() {
                return Err(OffError::NaInBaseFeature {
                    row,
                    col: schema.base_names[c].clone(),
                });
            }
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => base.push(v),
                _ => {
                    return Err(OffError::NonNumericCell {
                        row,
                        col: schema.base_names[c].clone(),
                    })
                }
            }
        }
        for (c, &idx) in opt_idx.iter().enumerate() {
            let text = cell(idx);
            if text == na_token {
                optional.push(NA);
                bits.push(false);
                continue;
            }
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    optional.push(v);
                    bits.push(true);
                }
                _ => {
                    return Err(OffError::NonNumericCell {
                        row,
                        col: schema.optional_names[c].clone(),
                    })
                }
            }
        }
        raw_labels.push(cell(label_idx).to_owned());
    }
    let rows = raw_labels.len();
    let labels = parse_label_column(&raw_labels)?;
    LabeledDataset::new(
        schema.clone(),
        DMatrix::from_row_slice(rows, n, &base),
        DMatrix::from_row_slice(rows, r, &optional),
        AvailabilityMask::new(rows, r, bits)?,
        labels,
    )
}

/// Loads a CSV file. Optional cells equal to `na_token` become unavailable;
/// base features may never be missing. Labels are either 0/1 or exactly two
/// distinct strings (the lexicographically larger one is the positive class).
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, na_token: &str) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file), schema, na_token)
}

/// Writes `base..., optional..., label` columns; unavailable cells use `na_token`.
pub fn write_csv<W: Write>(ds: &LabeledDataset, writer: W, na_token: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = ds.schema();
    wtr.write_record(
        schema
            .base_names
            .iter()
            .chain(&schema.optional_names)
            .chain(std::iter::once(&schema.label_name)),
    )?;
    for j in 0..ds.len() {
        let mut record: Vec<String> = ds.base.row(j).iter().map(|v| v.to_string()).collect();
        for c in 0..ds.n_optional() {
            record.push(if ds.mask.get(j, c) {
                ds.optional[(j, c)].to_string()
            } else {
                na_token.to_owned()
            });
        }
        record.push(ds.labels[j].to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>, na_token: &str) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(ds, std::io::BufWriter::new(file), na_token)
}

// ---------------------------------------------------------------------------
// Availability injection

/// How one optional feature is made unavailable:
/// `p(A = 0 | z) = sigmoid(λ (z − center))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInjection {
    pub feature: String,
    /// λ; positive values hide large feature values more often.
    pub slope: f64,
    /// Divide the slope by the feature's standard deviation.
    #[serde(default)]
    pub per_std: bool,
    /// Sigmoid center; the empirical feature mean when absent.
    #[serde(default)]
    pub center: Option<f64>,
}

impl FeatureInjection {
    pub fn new(feature: impl Into<String>, slope: f64) -> Self {
        Self {
            feature: feature.into(),
            slope,
            per_std: false,
            center: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InjectionSpec {
    pub features: Vec<FeatureInjection>,
}

fn mean_and_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Randomly hides optional values with a sigmoidal, value-dependent probability.
///
/// Targeted features must be fully available beforehand. Rows are visited in
/// order and features in spec order, one uniform draw per cell.
pub fn inject_availability(ds: &LabeledDataset, spec: &InjectionSpec, seed: u64) -> Result<LabeledDataset> {
    let mut targets = Vec::with_capacity(spec.features.len());
    for inj in &spec.features {
        let col = ds
            .schema
            .optional_index(&inj.feature)
            .ok_or_else(|| OffError::UnknownFeature(inj.feature.clone()))?;
        if ds.mask.column(col).any(|a| !a) {
            return Err(OffError::AlreadyMissing(inj.feature.clone()));
        }
        let column = ds.optional.column(col);
        let (mean, std) = mean_and_std(column.iter().copied());
        let center = inj.center.unwrap_or(mean);
        let slope = if inj.per_std {
            if std > 0.0 {
                inj.slope / std
            } else {
                0.0
            }
        } else {
            inj.slope
        };
        if !slope.is_finite() || !center.is_finite() {
            return Err(OffError::InvalidParameter(format!(
                "injection for `{}` needs finite slope and center",
                inj.feature
            )));
        }
        targets.push((col, slope, center));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ds.clone();
    for j in 0..ds.len() {
        for &(col, slope, center) in &targets {
            let p_missing = sigmoid(slope * (ds.optional[(j, col)] - center));
            if rng.random::<f64>() < p_missing {
                out.mask.bits[j * out.mask.cols + col] = false;
                out.optional[(j, col)] = NA;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Views used by baselines

/// `[base | optional]` with unavailable cells set to 0, plus the mask as 0/1
/// columns when `add_indicator` is set.
pub fn impute_zero(ds: &LabeledDataset, add_indicator: bool) -> DMatrix<f64> {
    let (n, r) = (ds.n_base(), ds.n_optional());
    let width = n + r + if add_indicator { r } else { 0 };
    DMatrix::from_fn(ds.len(), width, |j, c| {
        if c < n {
            ds.base[(j, c)]
        } else if c < n + r {
            if ds.mask.get(j, c - n) {
                ds.optional[(j, c - n)]
            } else {
                0.0
            }
        } else if ds.mask.get(j, c - n - r) {
            1.0
        } else {
            0.0
        }
    })
}

/// The base block alone.
pub fn drop_optional(ds: &LabeledDataset) -> DMatrix<f64> {
    ds.base.clone()
}

/// Largest `r` such that `train_rows / 2^r >= min_samples`; 0 when not even
/// one submodel can be fed.
pub fn select_optional_count(train_rows: usize, min_samples: usize) -> usize {
    let min_samples = min_samples.max(1);
    let mut r = 0;
    while r < 63 && train_rows as f64 / 2f64.powi(r as i32 + 1) >= min_samples as f64 {
        r += 1;
    }
    r
}

/// Splits into (train, test) with `floor((1 − fraction)·N)` test rows.
/// Each part keeps the original row order.
pub fn split_train_test(ds: &LabeledDataset, fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(OffError::InvalidParameter(format!("split fraction {fraction} not in (0,1)")));
    }
    let n = ds.len();
    let test_n = ((1.0 - fraction) * n as f64 + 1e-9).floor() as usize;
    let train_n = n - test_n;
    if test_n == 0 || train_n == 0 {
        return Err(OffError::EmptySplit {
            train: train_n,
            test: test_n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut test: Vec<usize> = idx[..test_n].to_vec();
    let mut train: Vec<usize> = idx[test_n..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

fn accuracy(model: &crate::learner::SubsetModel, x: &DMatrix<f64>, y: &[u8]) -> f64 {
    let hits = (0..x.nrows())
        .filter(|&j| {
            let row: Vec<f64> = x.row(j).iter().copied().collect();
            u8::from(model.predict_row(&row) >= 0.5) == y[j]
        })
        .count();
    hits as f64 / x.nrows() as f64
}

/// Drop score of every feature: accuracy with all features minus accuracy
/// without it, on a held-out 20% split. Returns `(name, score)` pairs sorted
/// by descending score, ties by column index.
pub fn feature_drop_scores(
    ds: &LabeledDataset,
    learner: &dyn SubsetLearner,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    let names: Vec<String> = ds
        .schema
        .base_names
        .iter()
        .chain(&ds.schema.optional_names)
        .cloned()
        .collect();
    if names.len() == 1 {
        return Ok(vec![(names[0].clone(), 0.0)]);
    }
    let (train, test) = split_train_test(ds, 0.8, seed)?;
    for part in [&train, &test] {
        let pos = part.labels.iter().filter(|&&y| y == 1).count();
        if pos == 0 || pos == part.len() {
            return Err(OffError::DegenerateLabels);
        }
    }
    let x_train = impute_zero(&train, false);
    let x_test = impute_zero(&test, false);
    let full = learner.fit(&x_train, &train.labels, train.weights())?;
    let full_acc = accuracy(&full, &x_test, &test.labels);

    let mut scores = Vec::with_capacity(names.len());
    for (c, name) in names.iter().enumerate() {
        let keep: Vec<usize> = (0..names.len()).filter(|&k| k != c).collect();
        let xt = x_train.select_columns(keep.iter());
        let xs = x_test.select_columns(keep.iter());
        let model = learner.fit(&xt, &train.labels, train.weights())?;
        scores.push((c, name.clone(), full_acc - accuracy(&model, &xs, &test.labels)));
    }
    scores.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    Ok(scores.into_iter().map(|(_, n, s)| (n, s)).collect())
}

/// Feature names ordered from most to least discriminative.
pub fn rank_features_by_drop(ds: &LabeledDataset, learner: &dyn SubsetLearner, seed: u64) -> Result<Vec<String>> {
    Ok(feature_drop_scores(ds, learner, seed)?.into_iter().map(|(n, _)| n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ADMISSIONS_CSV: &str = "\
courses,gpa,test_score,admitted
0,3.6,87,Yes
1,3.7,N/A,Yes
0,3.6,92,Yes
0,3.6,N/A,No
2,3.0,56,No
";

    fn admissions_schema() -> Schema {
        Schema::new(["courses", "gpa"], ["test_score"], "admitted").unwrap()
    }

    #[test]
    fn loads_admissions_table() {
        let ds = read_csv(ADMISSIONS_CSV.as_bytes(), &admissions_schema(), "N/A").unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.n_optional(), 1);
        let mask: Vec<bool> = ds.mask().column(0).collect();
        assert_eq!(mask, vec![true, false, true, false, true]);
        assert_eq!(ds.labels(), &[1, 1, 1, 0, 0]);
        assert!(ds.optional_values()[(1, 0)].is_nan());
    }

    #[test]
    fn loads_without_optional_features() {
        let schema = Schema::new(vec!["x"], Vec::<String>::new(), "y").unwrap();
        let ds = read_csv("x,y\n1,0\n2,1\n3,1\n".as_bytes(), &schema, "N/A").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.mask().ncols(), 0);
    }

    #[test]
    fn all_missing_column() {
        let schema = Schema::new(["x"], ["z"], "y").unwrap();
        let ds = read_csv("x,z,y\n1,NA,0\n2,NA,1\n".as_bytes(), &schema, "NA").unwrap();
        assert!(ds.mask().column(0).all(|a| !a));
        assert!(ds.optional_values().iter().all(|v| v.is_nan()));
        let imputed = impute_zero(&ds, false);
        assert_eq!(imputed.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn csv_errors() {
        let schema = Schema::new(["x"], ["z"], "y").unwrap();
        assert!(matches!(
            read_csv("x,y\n1,0\n".as_bytes(), &schema, "N/A"),
            Err(OffError::MissingColumn(c)) if c == "z"
        ));
        assert!(matches!(
            read_csv("x,z,y\nabc,1,0\n".as_bytes(), &schema, "N/A"),
            Err(OffError::NonNumericCell { row: 0, .. })
        ));
        assert!(matches!(
            read_csv("x,z,y\nN/A,1,0\n".as_bytes(), &schema, "N/A"),
            Err(OffError::NaInBaseFeature { row: 0, .. })
        ));
        assert!(matches!(
            read_csv("x,z,y\n1,1,a\n2,1,b\n3,1,c\n".as_bytes(), &schema, "N/A"),
            Err(OffError::LabelNotBinary(_))
        ));
    }

    #[test]
    fn schema_rejects_duplicates_and_empty() {
        assert!(Schema::new(["a"], ["a"], "y").is_err());
        assert!(Schema::new(Vec::<String>::new(), Vec::<String>::new(), "y").is_err());
        assert!(Schema::new(["a"], ["b"], "a").is_err());
    }

    #[test]
    fn impute_and_drop() {
        let ds = read_csv(ADMISSIONS_CSV.as_bytes(), &admissions_schema(), "N/A").unwrap();
        let x = impute_zero(&ds, true);
        assert_eq!(x.ncols(), 4);
        assert_eq!(x[(1, 2)], 0.0);
        assert_eq!(x[(1, 3)], 0.0);
        assert_eq!(x[(0, 2)], 87.0);
        assert_eq!(x[(0, 3)], 1.0);
        let b = drop_optional(&ds);
        assert_eq!((b.nrows(), b.ncols()), (5, 2));
        assert_eq!(x.columns(0, 2), b.columns(0, 2));
    }

    #[test]
    fn optional_count_rule() {
        assert_eq!(select_optional_count(614, 150), 2);
        assert_eq!(select_optional_count(5754, 150), 5);
        assert_eq!(select_optional_count(150, 150), 0);
        assert_eq!(select_optional_count(100, 150), 0);
        assert_eq!(select_optional_count(300, 150), 1);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let schema = Schema::new(["x"], Vec::<String>::new(), "y").unwrap();
        let mk = |n: usize| {
            let base = DMatrix::from_fn(n, 1, |j, _| j as f64);
            LabeledDataset::fully_available(schema.clone(), base, DMatrix::zeros(n, 0), (0..n).map(|j| (j % 2) as u8).collect()).unwrap()
        };
        let ds = mk(10);
        let (tr, te) = split_train_test(&ds, 0.8, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (tr2, te2) = split_train_test(&ds, 0.8, 7).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
        let mut all: Vec<f64> = tr.base().iter().chain(te.base().iter()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|v| v as f64).collect::<Vec<_>>());

        let (tr, te) = split_train_test(&mk(5), 0.5, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (3, 2));
        assert!(matches!(split_train_test(&mk(2), 0.9, 1), Err(OffError::EmptySplit { .. })));
    }

    #[test]
    fn injection_refuses_double_injection() {
        let ds = read_csv(ADMISSIONS_CSV.as_bytes(), &admissions_schema(), "N/A").unwrap();
        let spec = InjectionSpec {
            features: vec![FeatureInjection::new("test_score", 1.0)],
        };
        assert!(matches!(inject_availability(&ds, &spec, 1), Err(OffError::AlreadyMissing(_))));
    }

    #[test]
    fn repartition_moves_columns() {
        let schema = Schema::new(["a", "b"], ["c"], "y").unwrap();
        let base = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let opt = DMatrix::from_row_slice(2, 1, &[5.0, 6.0]);
        let ds = LabeledDataset::fully_available(schema, base, opt, vec![0, 1]).unwrap();
        let re = ds.repartition(&["b".to_string()]).unwrap();
        assert_eq!(re.schema().base_names, vec!["a", "c"]);
        assert_eq!(re.schema().optional_names, vec!["b"]);
        assert_eq!(re.base_row(1), vec![3.0, 6.0]);
        assert_eq!(re.optional_row(0), vec![2.0]);
    }
}
