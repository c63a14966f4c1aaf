//! Exact conditional expectations on finite distributions.

use nalgebra::DMatrix;

use crate::dataset::{AvailabilityMask, LabeledDataset, Schema, NA};
use crate::error::{OffError, Result};

/// One point mass `(b, a, z, y)` of a finite joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub b: Vec<f64>,
    pub a: Vec<bool>,
    /// Entries where `a_i = 0` are ignored.
    pub z: Vec<f64>,
    pub y: u8,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    n: usize,
    r: usize,
    atoms: Vec<Atom>,
}

impl FiniteDistribution {
    /// Validates shapes and that the weights are nonnegative and sum to one.
    pub fn new(n: usize, r: usize, atoms: Vec<Atom>) -> Result<Self> {
        let mut total = 0.0;
        for atom in &atoms {
            if atom.b.len() != n || atom.a.len() != r || atom.z.len() != r {
                return Err(OffError::DimensionMismatch {
                    expected: n + 2 * r,
                    got: atom.b.len() + atom.a.len() + atom.z.len(),
                });
            }
            if !(atom.weight >= 0.0 && atom.weight.is_finite()) || atom.y > 1 {
                return Err(OffError::InvalidParameter("atom weights must be nonnegative, labels binary".into()));
            }
            total += atom.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(OffError::InvalidParameter(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Self { n, r, atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n_base(&self) -> usize {
        self.n
    }

    pub fn n_optional(&self) -> usize {
        self.r
    }

    /// `E[Y | B = b]`.
    pub fn mean_given_base(&self, b: &[f64]) -> Result<f64> {
        self.conditional_mean(|atom| atom.b == b)
    }

    /// Weighted mean of `y` over the atoms selected by `event`.
    pub fn conditional_mean(&self, event: impl Fn(&Atom) -> bool) -> Result<f64> {
        let (mut mass, mut pos) = (0.0, 0.0);
        for atom in self.atoms.iter().filter(|a| event(a)) {
            mass += atom.weight;
            pos += atom.weight * f64::from(atom.y);
        }
        if mass <= 0.0 {
            return Err(OffError::ZeroMassEvent);
        }
        Ok(pos / mass)
    }

    /// Expected squared error `E[(f(B, A, Z) − Y)²]`.
    pub fn expected_mse(&self, f: impl Fn(&Atom) -> Result<f64>) -> Result<f64> {
        self.atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| f(a).map(|p| a.weight * (p - f64::from(a.y)).powi(2)))
            .sum()
    }

    /// One weighted row per atom; unavailable `z` entries become the sentinel.
    pub fn to_dataset(&self) -> Result<LabeledDataset> {
        let schema = Schema::new(
            (0..self.n).map(|i| format!("b{}", i + 1)),
            (0..self.r).map(|i| format!("z{}", i + 1)),
            "y",
        )?;
        let rows = self.atoms.len();
        let base = DMatrix::from_fn(rows, self.n, |j, c| self.atoms[j].b[c]);
        let optional = DMatrix::from_fn(rows, self.r, |j, c| {
            let atom = &self.atoms[j];
            if atom.a[c] {
                atom.z[c]
            } else {
                NA
            }
        });
        let bits = self.atoms.iter().flat_map(|a| a.a.iter().copied()).collect();
        let mask = AvailabilityMask::new(rows, self.r, bits)?;
        let labels = self.atoms.iter().map(|a| a.y).collect();
        LabeledDataset::new(schema, base, optional, mask, labels)?
            .with_weights(self.atoms.iter().map(|a| a.weight).collect())
    }
}

/// `E[Y | B = b, A_I = 1, Z_I = z_I]` with `I = I(a)`, marginalising over the
/// availability of every feature outside `I`.
pub fn brute_force_off(dist: &FiniteDistribution, b: &[f64], a: &[bool], z: &[f64]) -> Result<f64> {
    if b.len() != dist.n || a.len() != dist.r || z.len() != dist.r {
        return Err(OffError::DimensionMismatch {
            expected: dist.n + 2 * dist.r,
            got: b.len() + a.len() + z.len(),
        });
    }
    dist.conditional_mean(|atom| {
        atom.b == b && (0..dist.r).all(|i| !a[i] || (atom.a[i] && atom.z[i] == z[i]))
    })
}
