//! Config-driven experiments. A config plus its seed list determines the
//! report byte for byte, whatever the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    feature_drop_scores, inject_availability, load_csv, select_optional_count, split_train_test, InjectionSpec,
    LabeledDataset, Schema, DEFAULT_NA_TOKEN,
};
use crate::error::{OffError, Result};
use crate::glm::FitConfig;
use crate::learner::{CountingLearner, GroupMeanLearner, LogisticLearner, SubsetLearner};
use crate::metrics::{self, mean, non_penalization_gap, sample_std};
use crate::models::{
    fit_base_with, fit_csp_with, fit_imputed_with, fit_multi_with, fit_nb_off, fit_off_lr_with, predict_dataset,
    FittedModel, OffPredictor,
};
use crate::synthetic::{sample_counterexample, sample_family, sample_family_complete, CounterexampleParams, FamilyOracle, FamilyParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Penalization,
    CostOfFairness,
    MultiOptional,
    SyntheticConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Base,
    Imputed,
    Csp,
    Multi,
    OffLr,
    NbOff,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Base => "base",
            ModelKind::Imputed => "imputed",
            ModelKind::Csp => "csp",
            ModelKind::Multi => "multi",
            ModelKind::OffLr => "off_lr",
            ModelKind::NbOff => "nb_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    #[default]
    Logistic,
    GroupMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        schema: Schema,
        #[serde(default = "default_na_token")]
        na_token: String,
    },
    /// Parametric family, either a named preset or explicit parameters.
    Family {
        #[serde(default)]
        preset: Option<String>,
        #[serde(default)]
        params: Option<FamilyParams>,
        #[serde(default)]
        rows: usize,
        /// Reveal every optional value, for use with an injection spec.
        #[serde(default)]
        complete: bool,
    },
    Counterexample {
        alpha: f64,
        rows: usize,
    },
}

fn default_na_token() -> String {
    DEFAULT_NA_TOKEN.to_owned()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_split() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

fn default_nb_alpha() -> f64 {
    1.0
}

fn default_test_rows() -> usize {
    20_000
}

fn default_min_samples() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub data: DataSource,
    /// Availability injection applied to fully available optional features.
    /// Optional features it does not name are moved into the base block.
    #[serde(default)]
    pub injection: InjectionSpec,
    /// Models to fit; empty selects the defaults of the experiment kind.
    #[serde(default)]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub learner: LearnerKind,
    /// Imputed baseline also sees the availability bits.
    #[serde(default = "default_true")]
    pub add_indicator: bool,
    #[serde(default)]
    pub unfavorable_label: u8,
    /// Also report `1 − AUC`.
    #[serde(default)]
    pub include_auc: bool,
    #[serde(default = "default_nb_alpha")]
    pub nb_alpha: f64,
    /// Training sizes for the convergence study.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Held-out rows for the convergence study.
    #[serde(default = "default_test_rows")]
    pub test_rows: usize,
    /// Number of optional features for the multi-feature experiment; derived
    /// from `min_samples` when absent.
    #[serde(default)]
    pub optional_count: Option<usize>,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
    /// Report directory used when none is given on the command line.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| OffError::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OffError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction {} not in (0,1)", self.split_fraction));
        }
        if self.unfavorable_label > 1 {
            return bad("unfavorable_label must be 0 or 1".into());
        }
        if self.nb_alpha.is_nan() || self.nb_alpha < 0.0 {
            return bad("nb_alpha must be nonnegative".into());
        }
        self.fit.validate()?;
        match &self.data {
            DataSource::Csv { path, schema, .. } => {
                schema.validate()?;
                if !path.is_file() {
                    return bad(format!("data file {} does not exist", path.display()));
                }
            }
            DataSource::Family { preset, params, rows, .. } => {
                match (preset, params) {
                    (Some(name), None) => {
                        FamilyParams::preset(name)?;
                    }
                    (None, Some(p)) => p.validate()?,
                    _ => return bad("family source needs exactly one of `preset` and `params`".into()),
                }
                if self.kind != ExperimentKind::SyntheticConvergence && *rows == 0 {
                    return bad("family source needs `rows`".into());
                }
            }
            DataSource::Counterexample { alpha, rows } => {
                CounterexampleParams::new(*alpha)?;
                if *rows == 0 {
                    return bad("counterexample source needs `rows`".into());
                }
            }
        }
        let models = self.models();
        let mut seen = std::collections::HashSet::new();
        if !models.iter().all(|m| seen.insert(*m)) {
            return bad("duplicate model".into());
        }
        match self.kind {
            ExperimentKind::Penalization => {
                if self.injection.features.len() != 1 {
                    return bad("penalization needs an injection spec for exactly one feature".into());
                }
                if !models.contains(&ModelKind::Base) {
                    return bad("penalization compares against the base model; list `base`".into());
                }
            }
            ExperimentKind::CostOfFairness => {}
            ExperimentKind::MultiOptional => {
                if !models.contains(&ModelKind::Multi) {
                    return bad("multi_optional measures gaps against `multi`; list it".into());
                }
            }
            ExperimentKind::SyntheticConvergence => {
                if !matches!(self.data, DataSource::Family { complete: false, .. }) {
                    return bad("synthetic_convergence needs a family source without `complete`".into());
                }
                if !self.injection.features.is_empty() {
                    return bad("synthetic_convergence does not use injection".into());
                }
                if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
                    return bad("synthetic_convergence needs `sizes` of at least 2 rows".into());
                }
                if self.test_rows == 0 {
                    return bad("test_rows must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Configured models, or the defaults of the experiment kind.
    pub fn models(&self) -> Vec<ModelKind> {
        use ModelKind::*;
        if !self.models.is_empty() {
            return self.models.clone();
        }
        match self.kind {
            ExperimentKind::Penalization => vec![Imputed, Base, Multi],
            ExperimentKind::CostOfFairness => vec![Base, Csp, Multi, Imputed],
            ExperimentKind::MultiOptional => vec![Multi, OffLr, Base, Imputed],
            ExperimentKind::SyntheticConvergence => vec![OffLr, Multi, Imputed],
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn family_params(&self) -> Result<FamilyParams> {
        match &self.data {
            DataSource::Family { preset: Some(name), .. } => FamilyParams::preset(name),
            DataSource::Family { params: Some(p), .. } => Ok(p.clone()),
            _ => Err(OffError::Config("not a family source".into())),
        }
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            add_indicator: self.add_indicator,
            nb_alpha: self.nb_alpha,
        }
    }

    fn learner(&self) -> Box<dyn SubsetLearner> {
        match self.learner {
            LearnerKind::Logistic => Box::new(LogisticLearner::new(self.fit)),
            LearnerKind::GroupMean => Box::new(GroupMeanLearner),
        }
    }
}

/// One measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Training rows (the grid size for the convergence study).
    pub size: usize,
    pub seed: u64,
    pub model: String,
    pub metric: String,
    pub value: f64,
}

/// Mean and sample standard deviation of one metric across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub size: usize,
    pub model: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub summary: Vec<Summary>,
    #[serde(skip)]
    pub records: Vec<Record>,
}

impl ExperimentReport {
    fn new(cfg: &ExperimentConfig, records: Vec<Record>) -> Self {
        let mut order: Vec<(usize, String, String)> = Vec::new();
        let mut groups: BTreeMap<(usize, String, String), Vec<f64>> = BTreeMap::new();
        for rec in &records {
            let key = (rec.size, rec.model.clone(), rec.metric.clone());
            groups
                .entry(key.clone())
                .or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                })
                .push(rec.value);
        }
        let summary = order
            .into_iter()
            .map(|key| {
                let values = &groups[&key];
                Summary {
                    size: key.0,
                    model: key.1,
                    metric: key.2,
                    mean: mean(values),
                    std: sample_std(values),
                    count: values.len(),
                }
            })
            .collect();
        Self {
            kind: cfg.kind,
            version: VERSION.to_owned(),
            config_hash: cfg.hash(),
            seeds: cfg.seeds.clone(),
            summary,
            records,
        }
    }

    pub fn summary_for(&self, model: &str, metric: &str) -> Vec<&Summary> {
        self.summary.iter().filter(|s| s.model == model && s.metric == metric).collect()
    }

    /// Mean of `metric` for `model`, when measured at a single size.
    pub fn mean_of(&self, model: &str, metric: &str) -> Option<f64> {
        match self.summary_for(model, metric).as_slice() {
            [s] => Some(s.mean),
            _ => None,
        }
    }

    pub fn values(&self, model: &str, metric: &str, size: Option<usize>) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.model == model && r.metric == metric && size.is_none_or(|n| r.size == n))
            .map(|r| r.value)
            .collect()
    }

    /// Long format, one line per record, headed by the toolkit version and
    /// config hash as comment lines.
    pub fn to_long_csv(&self) -> String {
        let mut out = self.header_comment();
        out.push_str(crate::metrics::LONG_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{},{}", r.size, r.seed, r.model, r.metric, r.value);
        }
        out
    }

    /// Aggregated values, one line per (size, model, metric).
    pub fn to_plot_csv(&self) -> String {
        let mut out = self.header_comment();
        out.push_str("size,model,metric,mean,std,count\n");
        for s in &self.summary {
            let _ = writeln!(out, "{},{},{},{},{},{}", s.size, s.model, s.metric, s.mean, s.std, s.count);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    fn header_comment(&self) -> String {
        format!("# off {} config {}\n", self.version, self.config_hash)
    }

    /// Writes `report.csv` and `summary.json`, plus `plot.csv` when asked.
    pub fn write(&self, dir: impl AsRef<Path>, emit_plot_data: bool) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = vec![
            (dir.join("report.csv"), self.to_long_csv()),
            (dir.join("summary.json"), self.to_json()),
        ];
        if emit_plot_data {
            files.push((dir.join("plot.csv"), self.to_plot_csv()));
        }
        for (path, text) in &files {
            std::fs::write(path, text)?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }

    /// Human-readable table of the summary.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>8}  {:<10} {:<20} {:>12} {:>10}", "size", "model", "metric", "mean", "std");
        let _ = writeln!(out, "rates in percent; mse raw; fits as counts");
        for s in &self.summary {
            let (mean, std) = match s.metric.as_str() {
                "fits" => (format!("{:.0}", s.mean), format!("{:.0}", s.std)),
                "mse" => (format!("{:.6}", s.mean), format!("{:.6}", s.std)),
                _ => (crate::metrics::percent(s.mean), crate::metrics::percent(s.std)),
            };
            let _ = writeln!(out, "{:>8}  {:<10} {:<20} {:>12} {:>10}", s.size, s.model, s.metric, mean, std);
        }
        out
    }
}

/// SplitMix64 finalizer; derives independent stream seeds from one seed.
fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const DATA_STREAM: u64 = 1;
const INJECT_STREAM: u64 = 2;
const SPLIT_STREAM: u64 = 3;
const TEST_STREAM: u64 = 4;
const RANK_STREAM: u64 = 5;

/// Settings of the baselines that have any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub add_indicator: bool,
    pub nb_alpha: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            add_indicator: true,
            nb_alpha: 1.0,
        }
    }
}

/// Fits one model and counts the primitive fits it needed.
pub fn fit_model(
    kind: ModelKind,
    train: &LabeledDataset,
    learner: &dyn SubsetLearner,
    opts: &ModelOptions,
) -> Result<(FittedModel, usize)> {
    let counter = CountingLearner::new(learner);
    let model = match kind {
        ModelKind::Base => FittedModel::Base(fit_base_with(train, &counter)?),
        ModelKind::Imputed => FittedModel::Imputed(fit_imputed_with(train, &counter, opts.add_indicator)?),
        ModelKind::Csp => FittedModel::Csp(fit_csp_with(train, &counter)?),
        ModelKind::Multi => FittedModel::Multi(fit_multi_with(train, &counter)?),
        ModelKind::OffLr => FittedModel::OffLr(fit_off_lr_with(train, &counter)?),
        ModelKind::NbOff => return Ok((FittedModel::NbOff(fit_nb_off(train, opts.nb_alpha)?), 1)),
    };
    Ok((model, counter.count()))
}

/// Keeps the optional features named in `keep` (in that order); the other
/// optional features join the base block.
fn restrict_optional(ds: &LabeledDataset, keep: &[String]) -> Result<LabeledDataset> {
    if ds.schema().optional_names == keep {
        Ok(ds.clone())
    } else {
        ds.repartition(keep)
    }
}

/// Candidate optional features for the multi-feature experiment: the top
/// `count` of `candidates` by drop score.
fn choose_candidates(
    ds: &LabeledDataset,
    candidates: &[String],
    cfg: &ExperimentConfig,
    learner: &dyn SubsetLearner,
    seed: u64,
) -> Result<Vec<String>> {
    let train_rows = ds.len() - ((1.0 - cfg.split_fraction) * ds.len() as f64 + 1e-9).floor() as usize;
    let count = cfg
        .optional_count
        .unwrap_or_else(|| select_optional_count(train_rows, cfg.min_samples))
        .min(candidates.len());
    if count == candidates.len() {
        return Ok(candidates.to_vec());
    }
    let ranked = feature_drop_scores(ds, learner, mix(seed, RANK_STREAM))?;
    Ok(ranked
        .into_iter()
        .map(|(name, _)| name)
        .filter(|name| candidates.contains(name))
        .take(count)
        .collect())
}

/// Raw data for one seed, with availability injected and candidates chosen,
/// split into (train, test).
fn prepare(
    cfg: &ExperimentConfig,
    csv: Option<&LabeledDataset>,
    learner: &dyn SubsetLearner,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let mut ds = match (&cfg.data, csv) {
        (DataSource::Csv { .. }, Some(ds)) => ds.clone(),
        (DataSource::Family { rows, complete, .. }, _) => {
            let p = cfg.family_params()?;
            if *complete {
                sample_family_complete(&p, *rows, mix(seed, DATA_STREAM))?
            } else {
                sample_family(&p, *rows, mix(seed, DATA_STREAM))?
            }
        }
        (DataSource::Counterexample { alpha, rows }, _) => {
            sample_counterexample(&CounterexampleParams::new(*alpha)?, *rows, mix(seed, DATA_STREAM))?
        }
        (DataSource::Csv { .. }, None) => unreachable!("csv data is loaded before the seed loop"),
    };
    let mut injection = cfg.injection.clone();
    let mut candidates: Vec<String> = if injection.features.is_empty() {
        ds.schema().optional_names.clone()
    } else {
        injection.features.iter().map(|f| f.feature.clone()).collect()
    };
    if cfg.kind == ExperimentKind::MultiOptional {
        candidates = choose_candidates(&ds, &candidates, cfg, learner, seed)?;
        injection.features.retain(|f| candidates.contains(&f.feature));
    }
    if !injection.features.is_empty() {
        ds = inject_availability(&ds, &injection, mix(seed, INJECT_STREAM))?;
    }
    ds = restrict_optional(&ds, &candidates)?;
    split_train_test(&ds, cfg.split_fraction, mix(seed, SPLIT_STREAM))
}

fn record(size: usize, seed: u64, model: ModelKind, metric: &str, value: f64) -> Record {
    Record {
        size,
        seed,
        model: model.name().to_owned(),
        metric: metric.to_owned(),
        value,
    }
}

fn fit_all(
    models: &[ModelKind],
    train: &LabeledDataset,
    learner: &dyn SubsetLearner,
    cfg: &ExperimentConfig,
) -> Result<Vec<(ModelKind, FittedModel, usize)>> {
    models
        .iter()
        .map(|&kind| fit_model(kind, train, learner, &cfg.model_options()).map(|(m, fits)| (kind, m, fits)))
        .collect()
}

fn per_seed<F>(cfg: &ExperimentConfig, job: F) -> Result<ExperimentReport>
where
    F: Fn(u64, Option<&LabeledDataset>, &dyn SubsetLearner) -> Result<Vec<Record>> + Sync,
{
    let csv = match &cfg.data {
        DataSource::Csv { path, schema, na_token } => Some(load_csv(path, schema, na_token)?),
        _ => None,
    };
    let learner = cfg.learner();
    let results: Vec<Result<Vec<Record>>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| job(seed, csv.as_ref(), learner.as_ref()))
        .collect();
    let mut records = Vec::new();
    for res in results {
        records.extend(res?);
    }
    Ok(ExperimentReport::new(cfg, records))
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(OffError::Config(format!("config is for {:?}, not {kind:?}", cfg.kind)));
    }
    cfg.validate()
}

fn require_single_optional(train: &LabeledDataset) -> Result<()> {
    if train.n_optional() != 1 {
        return Err(OffError::Config(format!(
            "this experiment needs exactly one optional feature, the data has {}",
            train.n_optional()
        )));
    }
    Ok(())
}

/// Per seed: average unfavourable score on the test rows that disclosed no
/// optional feature, for every model, and its change relative to the base model.
pub fn run_penalization(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Penalization)?;
    let models = cfg.models();
    per_seed(cfg, |seed, csv, learner| {
        let (train, test) = prepare(cfg, csv, learner, seed)?;
        require_single_optional(&train)?;
        let fitted = fit_all(&models, &train, learner, cfg)?;
        let base = &fitted.iter().find(|(k, _, _)| *k == ModelKind::Base).unwrap().1;
        let size = train.len();
        let mut out = Vec::new();
        for (kind, model, _) in &fitted {
            let gap = non_penalization_gap(model, base, &test, cfg.unfavorable_label)?;
            out.push(record(size, seed, *kind, "avg_unfavorable", gap.avg_imputed));
            out.push(record(size, seed, *kind, "change", gap.change));
            out.push(record(size, seed, *kind, "misclassification", metrics::misclassification(model, &test, 0.5)?));
        }
        Ok(out)
    })
}

fn one_minus_auc(model: &dyn OffPredictor, test: &LabeledDataset) -> Result<f64> {
    Ok(1.0 - metrics::auc(&predict_dataset(model, test)?, test.labels())?)
}

/// Per seed: misclassification and squared error (and optionally `1 − AUC`)
/// of each model on the test split.
pub fn run_cost_of_fairness(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::CostOfFairness)?;
    let models = cfg.models();
    per_seed(cfg, |seed, csv, learner| {
        let (train, test) = prepare(cfg, csv, learner, seed)?;
        require_single_optional(&train)?;
        let size = train.len();
        let mut out = Vec::new();
        for (kind, model, _) in fit_all(&models, &train, learner, cfg)? {
            out.push(record(size, seed, kind, "misclassification", metrics::misclassification(&model, &test, 0.5)?));
            out.push(record(size, seed, kind, "mse", metrics::mse(&model, &test)?));
            if cfg.include_auc {
                out.push(record(size, seed, kind, "one_minus_auc", one_minus_auc(&model, &test)?));
            }
        }
        Ok(out)
    })
}

/// Per seed: gap to the fitted multi model, misclassification and number
/// of primitive fits of each model.
pub fn run_multi_optional(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::MultiOptional)?;
    let models = cfg.models();
    per_seed(cfg, |seed, csv, learner| {
        let (train, test) = prepare(cfg, csv, learner, seed)?;
        let fitted = fit_all(&models, &train, learner, cfg)?;
        let reference = &fitted.iter().find(|(k, _, _)| *k == ModelKind::Multi).unwrap().1;
        let size = train.len();
        let mut out = Vec::new();
        for (kind, model, fits) in &fitted {
            out.push(record(size, seed, *kind, "off_gap", metrics::off_gap(model, reference, &test)?));
            out.push(record(size, seed, *kind, "misclassification", metrics::misclassification(model, &test, 0.5)?));
            out.push(record(size, seed, *kind, "fits", *fits as f64));
            if cfg.include_auc {
                out.push(record(size, seed, *kind, "one_minus_auc", one_minus_auc(model, &test)?));
            }
        }
        Ok(out)
    })
}

/// For every grid size and seed: gap of each model to the exact posterior
/// of the family, measured on a fresh sample of `test_rows` rows.
pub fn run_synthetic_convergence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::SyntheticConvergence)?;
    let params = cfg.family_params()?;
    let oracle = FamilyOracle::new(&params);
    let models = cfg.models();
    let learner = cfg.learner();
    let jobs: Vec<(usize, u64)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<Result<Vec<Record>>> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let train = sample_family(&params, n, mix(mix(seed, DATA_STREAM), n as u64))?;
            let test = sample_family(&params, cfg.test_rows, mix(seed, TEST_STREAM))?;
            let mut out = Vec::new();
            for (kind, model, _) in fit_all(&models, &train, learner.as_ref(), cfg)? {
                out.push(record(n, seed, kind, "off_gap", metrics::off_gap(&model, &oracle, &test)?));
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::new();
    for res in results {
        records.extend(res?);
    }
    Ok(ExperimentReport::new(cfg, records))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Penalization => run_penalization(cfg),
        ExperimentKind::CostOfFairness => run_cost_of_fairness(cfg),
        ExperimentKind::MultiOptional => run_multi_optional(cfg),
        ExperimentKind::SyntheticConvergence => run_synthetic_convergence(cfg),
    }
}

/// Value of `OFF_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("OFF_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a dedicated pool of `threads` workers (the rayon default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| OffError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
