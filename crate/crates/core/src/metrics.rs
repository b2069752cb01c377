//! Confusion matrix and the two tuning objectives.

use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emg_data::Movement;

const K: usize = Movement::COUNT;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{preds} predictions but {labels} labels")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("confusion matrix is empty")]
    Empty,
    #[error("no true rest samples")]
    NoRestSamples,
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: Movement, predicted: Movement) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, truth: Movement) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }

    /// CSV with a `true\predicted` corner cell and class labels on both axes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in Movement::ALL {
            write!(out, ",{c}").expect("string write");
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            write!(out, "{}", Movement::ALL[i]).expect("string write");
            for v in row {
                write!(out, ",{v}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(rhs.counts.iter().flatten()) {
            *a += b;
        }
    }
}

/// Labels are typed, so an out-of-range class cannot reach this point.
pub fn confusion(preds: &[Movement], labels: &[Movement]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch { preds: preds.len(), labels: labels.len() });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in preds.iter().zip(labels) {
        cm.add(t, p);
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    match cm.total() {
        0 => Err(MetricsError::Empty),
        n => Ok(cm.trace() as f64 / n as f64),
    }
}

/// True rest windows predicted as any movement.
pub fn rest_fn(cm: &ConfusionMatrix) -> u64 {
    cm.row_total(Movement::REST) - cm.counts[Movement::REST.index()][Movement::REST.index()]
}

/// `rest_fn` divided by the number of true rest windows.
pub fn rest_fn_rate(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    match cm.row_total(Movement::REST) {
        0 => Err(MetricsError::NoRestSamples),
        n => Ok(rest_fn(cm) as f64 / n as f64),
    }
}

pub fn rest_recall(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    match cm.row_total(Movement::REST) {
        0 => Err(MetricsError::NoRestSamples),
        n => Ok(cm.counts[Movement::REST.index()][Movement::REST.index()] as f64 / n as f64),
    }
}

/// Scalar summary of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub samples: u64,
    pub accuracy: f64,
    pub rest_fn: u64,
    pub rest_fn_rate: f64,
    pub rest_recall: f64,
    pub confusion: ConfusionMatrix,
}

impl EvalSummary {
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self, MetricsError> {
        Ok(Self {
            samples: cm.total(),
            accuracy: accuracy(&cm)?,
            rest_fn: rest_fn(&cm),
            rest_fn_rate: rest_fn_rate(&cm)?,
            rest_recall: rest_recall(&cm)?,
            confusion: cm,
        })
    }
}
