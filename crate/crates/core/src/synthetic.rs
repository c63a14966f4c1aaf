//! Generative families with known optional-feature-fair posteriors.
//!
//! The parametric family draws
//!
//! * `b ~ N(0, scale·I)` and `y ~ Bernoulli(σ(wᵀb + t))`,
//! * independently per optional feature, `A_i = 1` with probability
//!   `σ(u_iᵀb + λ_i)` if `y = 1` and `1 − σ(u_iᵀb + λ_i)` if `y = 0`,
//! * `z_i ~ N(v_iᵀb + τ_i(y), η²)` when available.
//!
//! Every subset posterior is then logistic with closed-form coefficients, which
//! [`oracle_coefficients`] computes.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{AvailabilityMask, LabeledDataset, Schema, NA};
use crate::error::{OffError, Result};
use crate::glm::sigmoid;
use crate::models::{check_shapes, OffLrModel, OffPredictor, OptionalTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionalFeatureParams {
    /// Base-feature dependence of availability.
    pub u: Vec<f64>,
    /// Class-dependent availability offset.
    pub lambda: f64,
    /// Base-feature dependence of the value.
    pub v: Vec<f64>,
    /// Value offset for `y = 0`.
    pub tau0: f64,
    /// Value offset for `y = 1`.
    pub tau1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub w: Vec<f64>,
    pub t: f64,
    /// Variance of every base feature.
    pub base_cov_scale: f64,
    pub features: Vec<OptionalFeatureParams>,
    /// Standard deviation of the optional values.
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    1.0
}

impl FamilyParams {
    /// Two base features, three optional features covering every allowed
    /// dependency between availability, values, base features and label.
    pub fn paper_synthetic() -> Self {
        Self {
            w: vec![-1.5, 1.0],
            t: 0.0,
            base_cov_scale: 5.0,
            features: vec![
                OptionalFeatureParams {
                    u: vec![0.8, 0.4],
                    lambda: 0.7,
                    v: vec![0.0, 1.0],
                    tau0: -0.25,
                    tau1: 0.25,
                },
                OptionalFeatureParams {
                    u: vec![0.0, 0.0],
                    lambda: 1.0,
                    v: vec![0.0, -0.15],
                    tau0: 0.4,
                    tau1: -0.4,
                },
                OptionalFeatureParams {
                    u: vec![0.0, 0.0],
                    lambda: 0.0,
                    v: vec![0.1, 0.2],
                    tau0: -0.2,
                    tau1: 0.2,
                },
            ],
            eta: 1.0,
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper_synthetic" => Ok(Self::paper_synthetic()),
            other => Err(OffError::Config(format!("unknown family preset `{other}`"))),
        }
    }

    pub fn n_base(&self) -> usize {
        self.w.len()
    }

    pub fn n_optional(&self) -> usize {
        self.features.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_base();
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if n == 0 || self.features.is_empty() {
            return Err(OffError::InvalidParameter("family needs n ≥ 1 and r ≥ 1".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) || !(self.base_cov_scale > 0.0 && self.base_cov_scale.is_finite()) {
            return Err(OffError::InvalidParameter("eta and base_cov_scale must be positive".into()));
        }
        if !finite(&self.w) || !self.t.is_finite() {
            return Err(OffError::InvalidParameter("base weights must be finite".into()));
        }
        for (i, f) in self.features.iter().enumerate() {
            if f.u.len() != n || f.v.len() != n {
                return Err(OffError::InvalidParameter(format!("feature {} needs u and v of length {n}", i + 1)));
            }
            if !finite(&f.u) || !finite(&f.v) || !finite(&[f.lambda, f.tau0, f.tau1]) {
                return Err(OffError::InvalidParameter(format!("feature {} has non-finite parameters", i + 1)));
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> Schema {
        Schema::new(
            (0..self.n_base()).map(|i| format!("b{}", i + 1)),
            (0..self.n_optional()).map(|i| format!("z{}", i + 1)),
            "y",
        )
        .expect("generated names are distinct")
    }
}

/// Closed-form coefficients of one optional feature's odds contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTerm {
    /// `η⁻²(τ_i1 − τ_i0)·v_i`
    pub gamma: Vec<f64>,
    /// `½η⁻²(τ_i0² − τ_i1²)`
    pub theta: f64,
    /// `u_i − γ_i`
    pub omega: Vec<f64>,
    /// `η⁻²(τ_i1 − τ_i0)`
    pub beta: f64,
    /// `λ_i + θ_i`
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCoefficients {
    pub w: Vec<f64>,
    pub t: f64,
    pub terms: Vec<OracleTerm>,
}

impl OracleCoefficients {
    /// Same coefficients as an [`OffLrModel`].
    pub fn to_off_lr(&self, schema: Schema) -> OffLrModel {
        OffLrModel {
            schema,
            w: self.w.clone(),
            t: self.t,
            terms: self
                .terms
                .iter()
                .map(|term| OptionalTerm {
                    omega: term.omega.clone(),
                    beta: term.beta,
                    s: term.s,
                })
                .collect(),
            fits: 0,
        }
    }
}

pub fn oracle_coefficients(p: &FamilyParams) -> OracleCoefficients {
    let inv_var = p.eta.powi(-2);
    let terms = p
        .features
        .iter()
        .map(|f| {
            let beta = inv_var * (f.tau1 - f.tau0);
            let gamma: Vec<f64> = f.v.iter().map(|v| beta * v).collect();
            let theta = 0.5 * inv_var * (f.tau0 * f.tau0 - f.tau1 * f.tau1);
            OracleTerm {
                omega: f.u.iter().zip(&gamma).map(|(u, g)| u - g).collect(),
                gamma,
                theta,
                beta,
                s: f.lambda + theta,
            }
        })
        .collect();
    OracleCoefficients {
        w: p.w.clone(),
        t: p.t,
        terms,
    }
}

/// Exact `p(Y=1 | b, z_I, A_I = 1)` for `I = I(a)`.
pub fn oracle_posterior(p: &FamilyParams, b: &[f64], a: &[bool], z: &[f64]) -> f64 {
    let coeffs = oracle_coefficients(p);
    let dot = |u: &[f64]| u.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut eta = dot(&coeffs.w) + coeffs.t;
    for (i, term) in coeffs.terms.iter().enumerate() {
        if a[i] {
            eta += dot(&term.omega) + term.beta * z[i] + term.s;
        }
    }
    sigmoid(eta)
}

/// [`oracle_posterior`] as an [`OffPredictor`], with coefficients precomputed.
#[derive(Debug, Clone)]
pub struct FamilyOracle {
    params: FamilyParams,
    model: OffLrModel,
}

impl FamilyOracle {
    pub fn new(params: &FamilyParams) -> Self {
        Self {
            params: params.clone(),
            model: oracle_coefficients(params).to_off_lr(params.schema()),
        }
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }
}

impl OffPredictor for FamilyOracle {
    fn predict(&self, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
        check_shapes(self.params.n_base(), self.params.n_optional(), b, a, z)?;
        self.model.predict(b, a, z)
    }
}

struct FamilyDraw {
    base: Vec<f64>,
    optional: Vec<f64>,
    bits: Vec<bool>,
    labels: Vec<u8>,
}

fn draw_family(p: &FamilyParams, n_rows: usize, seed: u64) -> Result<FamilyDraw> {
    p.validate()?;
    let (n, r) = (p.n_base(), p.n_optional());
    let sd = p.base_cov_scale.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FamilyDraw {
        base: Vec::with_capacity(n_rows * n),
        optional: Vec::with_capacity(n_rows * r),
        bits: Vec::with_capacity(n_rows * r),
        labels: Vec::with_capacity(n_rows),
    };
    let mut b = vec![0.0; n];
    for _ in 0..n_rows {
        for bi in b.iter_mut() {
            *bi = sd * rng.sample::<f64, _>(StandardNormal);
        }
        let dot = |u: &[f64]| u.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
        let y = rng.random::<f64>() < sigmoid(dot(&p.w) + p.t);
        for f in &p.features {
            let p_pos = sigmoid(dot(&f.u) + f.lambda);
            let p_avail = if y { p_pos } else { 1.0 - p_pos };
            let available = rng.random::<f64>() < p_avail;
            let tau = if y { f.tau1 } else { f.tau0 };
            let z = dot(&f.v) + tau + p.eta * rng.sample::<f64, _>(StandardNormal);
            out.bits.push(available);
            out.optional.push(z);
        }
        out.base.extend_from_slice(&b);
        out.labels.push(u8::from(y));
    }
    Ok(out)
}

/// Samples `n_rows` observations; deterministic per seed.
pub fn sample_family(p: &FamilyParams, n_rows: usize, seed: u64) -> Result<LabeledDataset> {
    let draw = draw_family(p, n_rows, seed)?;
    let (n, r) = (p.n_base(), p.n_optional());
    LabeledDataset::new(
        p.schema(),
        DMatrix::from_row_slice(n_rows, n, &draw.base),
        DMatrix::from_row_slice(n_rows, r, &draw.optional),
        AvailabilityMask::new(n_rows, r, draw.bits)?,
        draw.labels,
    )
}

/// Same draw as [`sample_family`] for the same seed, but every optional value
/// is revealed. Input for availability-injection experiments.
pub fn sample_family_complete(p: &FamilyParams, n_rows: usize, seed: u64) -> Result<LabeledDataset> {
    let draw = draw_family(p, n_rows, seed)?;
    let (n, r) = (p.n_base(), p.n_optional());
    LabeledDataset::fully_available(
        p.schema(),
        DMatrix::from_row_slice(n_rows, n, &draw.base),
        DMatrix::from_row_slice(n_rows, r, &draw.optional),
        draw.labels,
    )
}

/// Distribution on which the conditional-statistical-parity baseline loses to
/// the base model: a single constant base feature, `A ~ Bernoulli(α)`,
/// `Y = A`, and an uninformative `z ~ N(0, 1)` observed iff `A = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub alpha: f64,
}

impl CounterexampleParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(OffError::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Expected squared error of the ideal base model, `α(1 − α)`.
    pub fn base_loss(&self) -> f64 {
        self.alpha * (1.0 - self.alpha)
    }

    /// Expected squared error of the ideal CSP model, `1 − α`.
    pub fn csp_loss(&self) -> f64 {
        1.0 - self.alpha
    }
}

pub fn sample_counterexample(c: &CounterexampleParams, n_rows: usize, seed: u64) -> Result<LabeledDataset> {
    let c = CounterexampleParams::new(c.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(n_rows);
    let mut z = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let a = rng.random::<f64>() < c.alpha;
        let value: f64 = rng.sample(StandardNormal);
        bits.push(a);
        z.push(if a { value } else { NA });
        labels.push(u8::from(a));
    }
    LabeledDataset::new(
        Schema::new(["b1"], ["z1"], "y")?,
        DMatrix::from_element(n_rows, 1, 1.0),
        DMatrix::from_row_slice(n_rows, 1, &z),
        AvailabilityMask::new(n_rows, 1, bits)?,
        labels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_one_coefficients() {
        let c = oracle_coefficients(&FamilyParams::paper_synthetic());
        let f1 = &c.terms[0];
        assert!((f1.beta - 0.5).abs() < 1e-15);
        assert_eq!(f1.gamma, vec![0.0, 0.5]);
        assert!((f1.omega[0] - 0.8).abs() < 1e-15 && (f1.omega[1] + 0.1).abs() < 1e-15);
        assert_eq!(f1.theta, 0.0);
        assert!((f1.s - 0.7).abs() < 1e-15);
    }

    #[test]
    fn equal_offsets_carry_no_signal() {
        let mut p = FamilyParams::paper_synthetic();
        p.features[0].tau0 = 0.3;
        p.features[0].tau1 = 0.3;
        let t = &oracle_coefficients(&p).terms[0];
        assert_eq!(t.beta, 0.0);
        assert_eq!(t.gamma, vec![0.0, 0.0]);
        assert_eq!(t.theta, 0.0);
        assert_eq!(t.s, p.features[0].lambda);
    }

    #[test]
    fn doubling_eta_quarters_beta() {
        let p = FamilyParams::paper_synthetic();
        let mut q = p.clone();
        q.eta = 2.0 * p.eta;
        let (a, b) = (oracle_coefficients(&p), oracle_coefficients(&q));
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert!((y.beta - x.beta / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_subset_at_origin() {
        let p = FamilyParams::paper_synthetic();
        let none = [false; 3];
        assert_eq!(oracle_posterior(&p, &[0.0, 0.0], &none, &[NA; 3]), 0.5);
        let p1 = oracle_posterior(&p, &[0.0, 0.0], &[true, false, false], &[0.0, NA, NA]);
        assert!((p1 - sigmoid(0.7)).abs() < 1e-15);
        assert!((p1 - 0.668_187_772).abs() < 1e-9);
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = FamilyParams::paper_synthetic();
        assert_eq!(sample_family(&p, 500, 9).unwrap(), sample_family(&p, 500, 9).unwrap());
        assert_ne!(sample_family(&p, 500, 9).unwrap(), sample_family(&p, 500, 10).unwrap());
    }

    #[test]
    fn complete_sample_reveals_the_same_draw() {
        let p = FamilyParams::paper_synthetic();
        let partial = sample_family(&p, 200, 4).unwrap();
        let full = sample_family_complete(&p, 200, 4).unwrap();
        assert_eq!(partial.base(), full.base());
        for j in 0..200 {
            for i in 0..3 {
                if partial.mask().get(j, i) {
                    assert_eq!(partial.optional_values()[(j, i)], full.optional_values()[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn counterexample_closed_forms() {
        let c = CounterexampleParams::new(0.5).unwrap();
        assert_eq!(c.base_loss(), 0.25);
        assert_eq!(c.csp_loss(), 0.5);
        let near_one = CounterexampleParams::new(1.0 - 1e-9).unwrap();
        assert!(near_one.base_loss() < 1e-8 && near_one.csp_loss() < 1e-8);
        assert!(CounterexampleParams::new(1.0).is_err());
    }

    #[test]
    fn params_json_roundtrip() {
        let p = FamilyParams::paper_synthetic();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<FamilyParams>(&s).unwrap(), p);
    }
}
