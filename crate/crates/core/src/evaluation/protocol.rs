use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{EvalError, EvalReport, ReportRow, Triple};
use crate::calibration::{calibrate_full, CalibrationOptions, FitError};
use crate::dataset::Dataset;
use crate::model::{estimate_tc, geometry_attenuation, predict, texture_mos, ModelParams};
use crate::rng;

/// Anything that can fit model parameters on a training set.
pub trait Calibrator: Sync {
    fn calibrate(&self, train: &Dataset) -> Result<ModelParams, FitError>;
}

impl Calibrator for CalibrationOptions {
    fn calibrate(&self, train: &Dataset) -> Result<ModelParams, FitError> {
        calibrate_full(train, self).map(|(p, _)| p)
    }
}

impl<F> Calibrator for F
where
    F: Fn(&Dataset) -> Result<ModelParams, FitError> + Sync,
{
    fn calibrate(&self, train: &Dataset) -> Result<ModelParams, FitError> {
        self(train)
    }
}

/// Training contents of the published 10/10 WPC6.0 split.
pub const WPC6_TRAINING_CONTENTS: [&str; 10] = [
    "bag",
    "cauliflower",
    "glasses_case",
    "honeydew_melon",
    "house",
    "mushroom",
    "pineapple",
    "ping-pong_bat",
    "puer_tea",
    "tool_box",
];

/// Testing contents of the published 10/10 WPC6.0 split.
pub const WPC6_TESTING_CONTENTS: [&str; 10] = [
    "banana",
    "biscuits",
    "cake",
    "flowerpot",
    "litchi",
    "pen_container",
    "pumpkin",
    "ship",
    "statue",
    "stone",
];

/// One content-held-out split.
#[derive(Debug, Clone)]
pub struct Fold {
    pub held_out: String,
    pub train: Dataset,
    pub test: Dataset,
}

/// One fold per content, in sorted content order.
pub fn loocv_folds(dataset: &Dataset) -> Result<Vec<Fold>, EvalError> {
    let contents = dataset.content_ids();
    if contents.len() < 2 {
        return Err(EvalError::TooFewContents(contents.len()));
    }
    Ok(contents
        .into_iter()
        .map(|c| {
            let ids = std::slice::from_ref(&c);
            let train = dataset.select_contents(ids, false);
            let test = dataset.select_contents(ids, true);
            assert!(
                train.records.iter().all(|r| r.content_id != c),
                "fold for `{c}` leaks held-out records into training"
            );
            Fold {
                held_out: c,
                train,
                test,
            }
        })
        .collect())
}

fn score(params: &ModelParams, test: &Dataset) -> Result<Triple, EvalError> {
    let predicted: Vec<f64> = test
        .records
        .iter()
        .map(|r| predict(&r.features, params).mos_est)
        .collect();
    let observed: Vec<f64> = test.records.iter().map(|r| r.mos).collect();
    Triple::compute(&predicted, &observed)
}

fn finish(
    protocol: &str,
    outcomes: Vec<(String, usize, Result<Triple, EvalError>)>,
    metadata: BTreeMap<String, String>,
) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport {
        protocol: protocol.into(),
        metadata,
        ..Default::default()
    };
    for (group, n, outcome) in outcomes {
        match outcome {
            Ok(triple) => report.rows.push(ReportRow { group, n, triple }),
            Err(e) => report.failed.push((group, e.to_string())),
        }
    }
    if report.rows.is_empty() {
        let first = report
            .failed
            .first()
            .map(|(g, e)| format!("{g}: {e}"))
            .unwrap_or_default();
        return Err(EvalError::AllGroupsFailed(first));
    }
    Ok(report.with_aggregates())
}

/// Content-wise leave-one-out cross-validation on raw predictions.
///
/// Folds that fail to calibrate or score are listed in `failed` and left
/// out of the aggregates.
pub fn loocv(dataset: &Dataset, calibrator: &impl Calibrator) -> Result<EvalReport, EvalError> {
    let folds = loocv_folds(dataset)?;
    let outcomes: Vec<_> = folds
        .par_iter()
        .map(|f| {
            let outcome = calibrator
                .calibrate(&f.train)
                .map_err(EvalError::from)
                .and_then(|p| score(&p, &f.test));
            (f.held_out.clone(), f.test.len(), outcome)
        })
        .collect();
    let metadata = BTreeMap::from([("folds".to_string(), folds.len().to_string())]);
    finish("loocv", outcomes, metadata)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub trials: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            train_fraction: 0.5,
            seed: rng::DEFAULT_SEED,
        }
    }
}

/// Repeated random content splits. Trial `t` shuffles the sorted content
/// ids with stream `t` of the seeded generator and trains on the first
/// `round(fraction · k)`. Each row pools the whole test set.
pub fn random_trials(
    dataset: &Dataset,
    calibrator: &impl Calibrator,
    options: TrialOptions,
) -> Result<EvalReport, EvalError> {
    let contents = dataset.content_ids();
    if contents.len() < 2 {
        return Err(EvalError::TooFewContents(contents.len()));
    }
    if !(0.0..=1.0).contains(&options.train_fraction) {
        return Err(EvalError::InvalidArgument(format!(
            "train fraction {} is outside [0, 1]",
            options.train_fraction
        )));
    }
    let n_train = (options.train_fraction * contents.len() as f64).round() as usize;
    if n_train >= contents.len() {
        return Err(EvalError::EmptyTestSet);
    }
    if n_train == 0 {
        return Err(EvalError::EmptyTrainingSet);
    }
    let outcomes: Vec<_> = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let mut ids = contents.clone();
            let mut r = rng::stream(options.seed, t as u64);
            rng::fisher_yates(&mut ids, &mut r);
            let train = dataset.select_contents(&ids[..n_train], true);
            let test = dataset.select_contents(&ids[..n_train], false);
            let outcome = calibrator
                .calibrate(&train)
                .map_err(EvalError::from)
                .and_then(|p| score(&p, &test));
            (format!("trial_{t:04}"), test.len(), outcome)
        })
        .collect();
    let metadata = BTreeMap::from([
        ("seed".to_string(), options.seed.to_string()),
        ("trials".to_string(), options.trials.to_string()),
        ("train_contents".to_string(), n_train.to_string()),
        (
            "test_contents".to_string(),
            (contents.len() - n_train).to_string(),
        ),
    ]);
    finish("random", outcomes, metadata)
}

/// Texture-only, geometry-only and full model on a fixed content split.
/// Rows: `texture-only` (`MOS_T`), `geometry-only` (`b · D_G`), `full`.
pub fn ablation(
    dataset: &Dataset,
    calibrator: &impl Calibrator,
    train_ids: &[String],
    test_ids: &[String],
) -> Result<EvalReport, EvalError> {
    if let Some(c) = train_ids.iter().find(|c| test_ids.contains(c)) {
        return Err(EvalError::InvalidArgument(format!(
            "content `{c}` is in both the training and the test split"
        )));
    }
    let train = dataset.select_contents(train_ids, true);
    let test = dataset.select_contents(test_ids, true);
    if train.is_empty() {
        return Err(EvalError::EmptyTrainingSet);
    }
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let p = calibrator.calibrate(&train)?;
    let observed: Vec<f64> = test.records.iter().map(|r| r.mos).collect();
    let variant = |f: &dyn Fn(&crate::dataset::DatasetRecord) -> f64| -> Vec<f64> {
        test.records.iter().map(f).collect()
    };
    let texture = variant(&|r| {
        let f = &r.features;
        texture_mos(estimate_tc(f.tqp, f.tbpp, &p), f.tqp, &p)
    });
    let geometry = variant(&|r| p.b * geometry_attenuation(r.features.tnsl, &p));
    let full = variant(&|r| predict(&r.features, &p).mos_est);
    let outcomes = vec![
        (
            "texture-only".to_string(),
            test.len(),
            Triple::compute(&texture, &observed),
        ),
        (
            "geometry-only".to_string(),
            test.len(),
            Triple::compute(&geometry, &observed),
        ),
        (
            "full".to_string(),
            test.len(),
            Triple::compute(&full, &observed),
        ),
    ];
    let metadata = BTreeMap::from([
        ("train_contents".to_string(), train_ids.join(";")),
        ("test_contents".to_string(), test_ids.join(";")),
    ]);
    let mut report = finish("ablation", outcomes, metadata)?;
    report.mean = None;
    report.std = None;
    Ok(report)
}
