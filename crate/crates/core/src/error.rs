use thiserror::Error;

use crate::config::ConfigError;
use crate::emg_data::DataError;
use crate::features::FeatureError;
use crate::metrics::MetricsError;
use crate::nsga2::Nsga2Error;
use crate::svm::SvmError;
use crate::tuner::TuneError;

/// Umbrella error for callers that drive the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Nsga2(#[from] Nsga2Error),
    #[error(transparent)]
    Tune(#[from] TuneError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
