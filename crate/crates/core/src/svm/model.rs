use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{squared_distance, KernelSource, PairwiseDistances, DENSE_LIMIT};
use super::smo::{solve, MAX_PAIR_UPDATES};
use super::{SvmError, SvmHyperparams};
use crate::emg_data::Movement;

/// A trained binary classifier. Only vectors with `α > 0` are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    /// Class mapped to `t = +1` in one-vs-rest training.
    pub positive_class: Option<Movement>,
    pub hyperparams: SvmHyperparams,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i t_i` per support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub kkt_violation: f64,
}

impl BinarySvmModel {
    pub fn dimension(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// Signed confidence `Σ_j α_j t_j K(sv_j, x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        let dim = self.dimension();
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch { expected: dim, found: x.len() });
        }
        Ok(self.decision_unchecked(x))
    }

    fn decision_unchecked(&self, x: &[f64]) -> f64 {
        let gamma = self.hyperparams.gamma;
        self.support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, coef)| coef * (-gamma * squared_distance(sv, x)).exp())
            .sum::<f64>()
            + self.bias
    }

    fn check(&self) -> Result<(), SvmError> {
        self.hyperparams.validate()?;
        if self.support_vectors.is_empty() || self.support_vectors.len() != self.dual_coeffs.len() {
            return Err(SvmError::Malformed("support vectors and coefficients must be non-empty and paired".into()));
        }
        let dim = self.dimension();
        if self.support_vectors.iter().any(|sv| sv.len() != dim) {
            return Err(SvmError::Malformed("support vectors have unequal dimensions".into()));
        }
        let c = self.hyperparams.c;
        if self.dual_coeffs.iter().any(|a| !(a.abs() > 0.0 && a.abs() <= c)) {
            return Err(SvmError::Malformed("coefficients must satisfy 0 < |α t| ≤ C".into()));
        }
        Ok(())
    }
}

fn check_inputs(x: &[Vec<f64>], labels: usize, hp: &SvmHyperparams, tol: f64) -> Result<usize, SvmError> {
    hp.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SvmError::InvalidTolerance(tol));
    }
    if x.is_empty() {
        return Err(SvmError::Empty);
    }
    if x.len() != labels {
        return Err(SvmError::DimensionMismatch { expected: x.len(), found: labels });
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(SvmError::DimensionMismatch { expected: dim, found: bad.len() });
    }
    Ok(dim)
}

/// Trains one binary model against a prepared kernel.
pub fn train_binary_with(
    x: &[Vec<f64>],
    t: &[f64],
    kernel: &KernelSource<'_>,
    hp: SvmHyperparams,
    tol: f64,
    positive_class: Option<Movement>,
) -> Result<BinarySvmModel, SvmError> {
    check_inputs(x, t.len(), &hp, tol)?;
    if let Some(&bad) = t.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(SvmError::InvalidLabel(bad));
    }
    if !(t.contains(&1.0) && t.contains(&-1.0)) {
        return Err(SvmError::SingleClass);
    }
    let sol = solve(kernel, t, hp.c, tol, MAX_PAIR_UPDATES)?;
    let (support_vectors, dual_coeffs) = sol
        .alpha
        .iter()
        .zip(t)
        .zip(x)
        .filter(|((&a, _), _)| a > 0.0)
        .map(|((&a, &ti), xi)| (xi.clone(), a * ti))
        .unzip();
    Ok(BinarySvmModel {
        positive_class,
        hyperparams: hp,
        support_vectors,
        dual_coeffs,
        bias: sol.bias,
        dual_objective: sol.dual_objective,
        iterations: sol.iterations,
        kkt_violation: sol.violation,
    })
}

/// Trains a binary RBF SVM with labels in `{−1, +1}`.
pub fn train_binary(x: &[Vec<f64>], t: &[f64], hp: SvmHyperparams, tol: f64) -> Result<BinarySvmModel, SvmError> {
    check_inputs(x, t.len(), &hp, tol)?;
    if x.len() <= DENSE_LIMIT {
        let gram = PairwiseDistances::compute(x).rbf_gram(hp.gamma);
        train_binary_with(x, t, &KernelSource::Dense(&gram), hp, tol, None)
    } else {
        train_binary_with(x, t, &KernelSource::Lazy { points: x, gamma: hp.gamma }, hp, tol, None)
    }
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax_class(scores: &[f64; Movement::COUNT]) -> Movement {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    Movement::ALL[best]
}

/// Eight binaries in class order `C1..C8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub hyperparams: SvmHyperparams,
    pub classes: Vec<Movement>,
    pub binaries: Vec<BinarySvmModel>,
}

impl OvrModel {
    pub fn dimension(&self) -> usize {
        self.binaries[0].dimension()
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<[f64; Movement::COUNT], SvmError> {
        let dim = self.dimension();
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch { expected: dim, found: x.len() });
        }
        Ok(std::array::from_fn(|k| self.binaries[k].decision_unchecked(x)))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Movement, SvmError> {
        Ok(argmax_class(&self.decision_values(x)?))
    }

    pub fn predict_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Movement>, SvmError> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }

    pub fn to_json(&self) -> Result<String, SvmError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SvmError> {
        let model: OvrModel = serde_json::from_str(text)?;
        if model.classes != Movement::ALL || model.binaries.len() != Movement::COUNT {
            return Err(SvmError::Malformed("expected one binary per class in order C1..C8".into()));
        }
        let dim = model.dimension();
        for (b, &class) in model.binaries.iter().zip(Movement::ALL) {
            b.check()?;
            if b.positive_class != Some(class) || b.dimension() != dim {
                return Err(SvmError::Malformed(format!("binary for {class} is inconsistent")));
            }
        }
        Ok(model)
    }
}

/// Trains one binary per class with a shared kernel source.
pub fn train_ovr_with(
    x: &[Vec<f64>],
    y: &[Movement],
    kernel: &KernelSource<'_>,
    hp: SvmHyperparams,
    tol: f64,
) -> Result<OvrModel, SvmError> {
    check_inputs(x, y.len(), &hp, tol)?;
    for &class in Movement::ALL {
        if !y.contains(&class) {
            return Err(SvmError::MissingClass(class));
        }
    }
    let binaries = Movement::ALL
        .par_iter()
        .map(|&class| {
            let t: Vec<f64> = y.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            train_binary_with(x, &t, kernel, hp, tol, Some(class))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OvrModel { hyperparams: hp, classes: Movement::ALL.to_vec(), binaries })
}

pub fn train_ovr(x: &[Vec<f64>], y: &[Movement], hp: SvmHyperparams, tol: f64) -> Result<OvrModel, SvmError> {
    check_inputs(x, y.len(), &hp, tol)?;
    if x.len() <= DENSE_LIMIT {
        let gram = PairwiseDistances::compute(x).rbf_gram(hp.gamma);
        train_ovr_with(x, y, &KernelSource::Dense(&gram), hp, tol)
    } else {
        train_ovr_with(x, y, &KernelSource::Lazy { points: x, gamma: hp.gamma }, hp, tol)
    }
}
