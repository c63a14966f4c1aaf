//! Classifiers for data with optional features that never penalize a
//! withheld feature, plus the data handling, synthetic generators and metrics
//! needed to evaluate them.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod glm;
pub mod learner;
pub mod metrics;
pub mod models;
pub mod synthetic;

pub use dataset::{AvailabilityMask, LabeledDataset, Schema};
pub use error::{OffError, Result};
pub use glm::{fit_logistic, FitConfig, LogisticParams};
pub use models::{FittedModel, OffPredictor, SubsetKey};
