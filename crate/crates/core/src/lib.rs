//! # myotune
//!
//! Hyperparameter tuning for one-vs-rest RBF-kernel SVMs that decode surface
//! EMG movement classes. The search is an elitist multi-objective genetic
//! algorithm (NSGA-II) over `(log10 C, log10 gamma)` that jointly maximizes
//! overall accuracy and minimizes false negatives of the rest class.
//!
//! The crate is organized bottom-up:
//!
//! - [`emg_data`]: recordings (CSV ingestion and a seeded synthetic
//!   generator), windowing and train/TS1/TS2 splits.
//! - [`features`]: six time-domain descriptors per channel.
//! - [`svm`]: RBF kernel, SMO dual solver, one-vs-rest wrapper.
//! - [`metrics`]: confusion matrix, accuracy and rest-class false negatives.
//! - [`nsga2`]: generic real-coded NSGA-II engine.
//! - [`tuner`]: the SVM objective, extreme-solution selection and reports.
//!
//! All randomness is derived from explicit 64-bit seeds; see [`rng`].

pub mod config;
pub mod emg_data;
pub mod error;
pub mod features;
pub mod metrics;
pub mod nsga2;
pub mod rng;
pub mod svm;
pub mod tuner;

pub use error::{Error, Result};
