//! Correlation metrics, cross-validation protocols and variance-ratio
//! significance testing.

pub mod fdist;
pub mod mapping;
pub mod metrics;
mod protocol;
mod report;
mod significance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::FitError;

pub use mapping::{nonlinear_map, Mapping};
pub use metrics::{plcc, rmse, srcc};
pub use protocol::{
    ablation, loocv, loocv_folds, random_trials, Calibrator, Fold, TrialOptions,
    WPC6_TESTING_CONTENTS, WPC6_TRAINING_CONTENTS,
};
pub use report::{EvalReport, ReportRow};
pub use significance::{
    ftest_variance_ratio, mapped_residuals, read_model_scores, significance_matrix, Cell, FTest,
    SignificanceMatrix, Verdict, MIN_SIGNIFICANCE_SAMPLES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least 2 contents, found {0}")]
    TooFewContents(usize),
    #[error("split leaves the test set empty")]
    EmptyTestSet,
    #[error("split leaves the training set empty")]
    EmptyTrainingSet,
    #[error("need more than {needed} residuals per model, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("models were not scored on the same stimuli: {0}")]
    MismatchedStimuli(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("every group failed; first error: {0}")]
    AllGroupsFailed(String),
    #[error("calibration failed: {0}")]
    Fit(#[from] FitError),
    #[error("csv: {0}")]
    Csv(String),
}

/// PLCC, SRCC and RMSE of one set of predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub plcc: f64,
    pub srcc: f64,
    pub rmse: f64,
}

impl Triple {
    pub fn compute(predicted: &[f64], observed: &[f64]) -> Result<Self, EvalError> {
        Ok(Self {
            plcc: plcc(predicted, observed)?,
            srcc: srcc(predicted, observed)?,
            rmse: rmse(predicted, observed)?,
        })
    }
}
