//! Fitting [`ModelParams`] from a labelled dataset.
//!
//! The stages run in order:
//!
//! 1. [`fit_tc_model`]: per-TQP lines of reference TC against TBPP, then a
//!    quadratic (slopes) and a line (intercepts) in TQP.
//! 2. [`fit_texture_model`]: per-content MOS/TQP slopes on the minimal-tNSL
//!    stratum, regressed on texture complexity.
//! 3. [`fit_geometry_attenuation`]: logistic curve through the mean
//!    `mos / mos_texture` ratio at each tNSL level.

mod attenuation;
mod fit;
mod ply;
mod reference_tc;
mod tc_model;
mod texture;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use attenuation::{fit_geometry_attenuation, AttenuationFit};
pub use fit::{fit_linear, fit_quadratic, LinearFit, QuadraticFit};
pub use ply::{parse_ascii_ply, read_ascii_ply, PointCloud};
pub use reference_tc::{compute_reference_tc, luma, DEFAULT_K};
pub use tc_model::{fit_tc_model, TcCoefficients, TcModelFit, TqpGroupFit};
pub use texture::{fit_texture_model, ContentSlope, TextureFit};

use crate::dataset::{Dataset, DatasetRecord};
use crate::model::{estimate_tc, texture_mos, FeatureRange, ModelParams};
use crate::optim::LmConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("input lengths differ in {stage}")]
    LengthMismatch { stage: String },
    #[error("content `{0}` has no reference texture complexity")]
    MissingReferenceTc(String),
    #[error("content `{0}` needs at least two TQP levels")]
    TooFewTqpLevels(String),
    #[error("need at least two contents, found {0}")]
    TooFewContents(usize),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("need at least {needed} points, found {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("neighbourhood size {0} is below 2")]
    InvalidNeighborhood(usize),
    #[error("ply: {0}")]
    Ply(String),
}

/// Which texture complexity the slope regression uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TcSource {
    /// Reference TC when every stratum record carries one, else estimated.
    #[default]
    Auto,
    Reference,
    /// TC estimated from (TQP, TBPP) with the stage-1 coefficients.
    Estimated,
}

/// How the common intercept `b` of the texture model is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterceptMode {
    /// Mean of the per-content least-squares intercepts.
    #[default]
    Shared,
    /// Mean MOS at the minimal TQP of the stratum.
    MeanMosAtMinimalDistortion,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationOptions {
    pub tc_source: TcSource,
    pub intercept: InterceptMode,
    /// Skip stage 1 and use these coefficients (needed when the dataset has
    /// no reference TC).
    pub tc_coefficients: Option<TcCoefficients>,
    pub lm: LmConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub stage_rss: BTreeMap<String, f64>,
    /// `(tqp, PLCC(tc_ref, tbpp))` per TQP group of stage 1.
    pub per_tqp_plcc: Vec<(f64, Option<f64>)>,
    pub attenuation_samples: Vec<(f64, f64)>,
    pub attenuation_iterations: usize,
    pub attenuation_converged: bool,
    pub texture_stratum_tnsl: f64,
    pub tc_source: Option<TcSource>,
    pub warnings: Vec<String>,
}

/// Groups records by a real-valued key, ascending.
pub(crate) fn group_by(
    records: &[DatasetRecord],
    key: impl Fn(&DatasetRecord) -> f64,
) -> Vec<(f64, Vec<&DatasetRecord>)> {
    let mut map: BTreeMap<u64, (f64, Vec<&DatasetRecord>)> = BTreeMap::new();
    for r in records {
        let k = key(r);
        map.entry(ordered_bits(k))
            .or_insert((k, Vec::new()))
            .1
            .push(r);
    }
    map.into_values().collect()
}

pub(crate) fn group_by_content(records: &[DatasetRecord]) -> Vec<(String, Vec<&DatasetRecord>)> {
    let mut map: BTreeMap<&str, Vec<&DatasetRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.content_id.as_str()).or_default().push(r);
    }
    map.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

/// Monotone map from f64 to u64 so BTreeMap keys sort numerically.
fn ordered_bits(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn sorted_records(dataset: &Dataset) -> Vec<DatasetRecord> {
    let mut records = dataset.records.clone();
    records.sort_by(|a, b| {
        a.content_id
            .cmp(&b.content_id)
            .then(a.features.tqp.total_cmp(&b.features.tqp))
            .then(a.features.tnsl.total_cmp(&b.features.tnsl))
    });
    records
}

/// Runs the three stages and assembles [`ModelParams`].
///
/// Records are sorted before fitting, so the result does not depend on the
/// input order.
pub fn calibrate_full(
    dataset: &Dataset,
    options: &CalibrationOptions,
) -> Result<(ModelParams, FitDiagnostics), FitError> {
    let records = sorted_records(dataset);
    if records.is_empty() {
        return Err(FitError::TooFewContents(0));
    }
    let mut diag = FitDiagnostics::default();

    let min_tnsl = records
        .iter()
        .map(|r| r.features.tnsl)
        .fold(f64::INFINITY, f64::min);
    let stratum: Vec<DatasetRecord> = records
        .iter()
        .filter(|r| r.features.tnsl == min_tnsl)
        .cloned()
        .collect();
    diag.texture_stratum_tnsl = min_tnsl;

    let tc = match options.tc_coefficients {
        Some(c) => c,
        None => {
            let fit = fit_tc_model(&stratum)?;
            diag.stage_rss.insert("tc_slope".into(), fit.slope_rss);
            diag.stage_rss
                .insert("tc_intercept".into(), fit.intercept_rss);
            diag.stage_rss.insert(
                "tc_lines".into(),
                fit.groups.iter().map(|g| g.line.rss).sum(),
            );
            diag.per_tqp_plcc = fit.groups.iter().map(|g| (g.tqp, g.plcc_tc_tbpp)).collect();
            fit.coefficients
        }
    };

    let tc_source = match options.tc_source {
        TcSource::Auto if stratum.iter().all(|r| r.tc_ref.is_some()) => TcSource::Reference,
        TcSource::Auto => TcSource::Estimated,
        other => other,
    };
    diag.tc_source = Some(tc_source);
    let texture = fit_texture_model(&stratum, tc_source, &tc, options.intercept)?;
    diag.stage_rss.insert("texture_mos".into(), texture.mos_rss);
    diag.stage_rss
        .insert("texture_slope".into(), texture.slope_rss);

    let mut params = ModelParams {
        b: texture.b,
        alpha: texture.alpha,
        beta: texture.beta,
        a1: tc.a1,
        a2: tc.a2,
        a3: tc.a3,
        b1: tc.b1,
        b2: tc.b2,
        l1: 0.0,
        l2: 0.0,
        l3: 1.0,
        training_range: None,
        metadata: BTreeMap::new(),
    };

    let samples = attenuation_samples(&records, &params, &mut diag.warnings);
    let att = fit_geometry_attenuation(&samples, options.lm)?;
    diag.attenuation_samples = samples;
    diag.stage_rss.insert("attenuation".into(), att.rss);
    diag.attenuation_iterations = att.iterations;
    diag.attenuation_converged = att.converged;
    if !att.converged {
        diag.warnings.push(format!(
            "attenuation fit stopped after {} iterations without converging",
            att.iterations
        ));
    }
    params.l1 = att.l1;
    params.l2 = att.l2;
    params.l3 = att.l3;

    let range = |f: fn(&DatasetRecord) -> f64| {
        records
            .iter()
            .map(f)
            .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| {
                [lo.min(v), hi.max(v)]
            })
    };
    params.training_range = Some(FeatureRange {
        tqp: range(|r| r.features.tqp),
        tnsl: range(|r| r.features.tnsl),
    });
    let contents = dataset.content_ids();
    params.metadata = BTreeMap::from([
        ("fitted_by".into(), crate::TOOL_VERSION.into()),
        ("records".into(), records.len().to_string()),
        ("contents".into(), contents.join(";")),
        ("texture_stratum_tnsl".into(), min_tnsl.to_string()),
        ("tc_source".into(), format!("{tc_source:?}").to_lowercase()),
        (
            "intercept_mode".into(),
            format!("{:?}", options.intercept).to_lowercase(),
        ),
        (
            "tc_coefficients".into(),
            if options.tc_coefficients.is_some() {
                "supplied"
            } else {
                "fitted"
            }
            .into(),
        ),
    ]);
    Ok((params, diag))
}

/// Mean of `mos / mos_texture` per tNSL level, using the texture model in
/// `params`.
fn attenuation_samples(
    records: &[DatasetRecord],
    params: &ModelParams,
    warnings: &mut Vec<String>,
) -> Vec<(f64, f64)> {
    let mut samples = Vec::new();
    for (tnsl, members) in group_by(records, |r| r.features.tnsl) {
        let ratios: Vec<f64> = members
            .iter()
            .filter_map(|r| {
                let tc = estimate_tc(r.features.tqp, r.features.tbpp, params);
                let mt = texture_mos(tc, r.features.tqp, params);
                (mt.abs() > 1e-9).then(|| r.mos / mt)
            })
            .collect();
        if ratios.len() < members.len() {
            warnings.push(format!(
                "tNSL {tnsl}: {} records with near-zero texture MOS skipped",
                members.len() - ratios.len()
            ));
        }
        if !ratios.is_empty() {
            samples.push((tnsl, ratios.iter().sum::<f64>() / ratios.len() as f64));
        }
    }
    samples
}
