//! Soft-margin RBF-kernel SVM.
//!
//! The dual `max Σα − ½ Σ α_i α_j t_i t_j K(x_i, x_j)` subject to
//! `0 ≤ α ≤ C` and `Σ α t = 0` is solved by SMO with maximal-violating-pair
//! working sets. Multiclass prediction is one-vs-rest: the binary model with
//! the largest decision value (confidence score) names the class.

mod kernel;
mod model;
mod smo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emg_data::Movement;

pub use kernel::{rbf_kernel, squared_distance, KernelSource, PairwiseDistances, DENSE_LIMIT};
pub use model::{argmax_class, train_binary, train_binary_with, train_ovr, train_ovr_with, BinarySvmModel, OvrModel};
pub use smo::{kkt_violations, solve, SmoSolution, MAX_PAIR_UPDATES};

/// Default KKT tolerance.
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training set is empty")]
    Empty,
    #[error("labels must be -1 or +1, found {0}")]
    InvalidLabel(f64),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("class {0} absent from training data")]
    MissingClass(Movement),
    #[error("invalid hyperparameters C={c}, gamma={gamma}: both must be positive and finite")]
    InvalidHyperparams { c: f64, gamma: f64 },
    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error("SMO did not converge after {iterations} pair updates (KKT violation {violation:.3e})")]
    NonConvergence { iterations: usize, violation: f64 },
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmHyperparams {
    pub c: f64,
    pub gamma: f64,
}

impl SvmHyperparams {
    pub fn new(c: f64, gamma: f64) -> Result<Self, SvmError> {
        let hp = Self { c, gamma };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.c) && ok(self.gamma) {
            Ok(())
        } else {
            Err(SvmError::InvalidHyperparams { c: self.c, gamma: self.gamma })
        }
    }
}
