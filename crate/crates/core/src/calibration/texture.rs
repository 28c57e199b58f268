use serde::{Deserialize, Serialize};

use super::fit::fit_linear;
use super::tc_model::TcCoefficients;
use super::{group_by_content, FitError, InterceptMode, TcSource};
use crate::dataset::DatasetRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentSlope {
    pub content_id: String,
    /// Per-content TQP slope `a` of the texture-only MOS.
    pub slope: f64,
    /// Texture complexity the slope is regressed on.
    pub tc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureFit {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub per_content: Vec<ContentSlope>,
    /// Residual sum of squares of MOS about `a_c·TQP + b`.
    pub mos_rss: f64,
    /// Residual sum of squares of `a_c` about `alpha·TC + beta`.
    pub slope_rss: f64,
    pub tc_source: TcSource,
}

fn estimated_tc(r: &DatasetRecord, c: &TcCoefficients) -> f64 {
    let q = r.features.tqp;
    (c.a1 * q * q + c.a2 * q + c.a3) * r.features.tbpp + c.b1 * q + c.b2
}

/// Fits `MOS_T = a_c·TQP + b` per content and `a_c = alpha·TC_c + beta`
/// across contents, on records free of geometry distortion (in practice the
/// caller passes the minimal-tNSL stratum).
///
/// `tc_source` must already be resolved to `Reference` or `Estimated`.
pub fn fit_texture_model(
    records: &[DatasetRecord],
    tc_source: TcSource,
    tc_coefficients: &TcCoefficients,
    intercept: InterceptMode,
) -> Result<TextureFit, FitError> {
    let contents = group_by_content(records);
    if contents.len() < 2 {
        return Err(FitError::TooFewContents(contents.len()));
    }
    let mut lines = Vec::with_capacity(contents.len());
    for (id, members) in &contents {
        let tqp: Vec<f64> = members.iter().map(|r| r.features.tqp).collect();
        let mos: Vec<f64> = members.iter().map(|r| r.mos).collect();
        let line = fit_linear(&tqp, &mos).map_err(|_| FitError::TooFewTqpLevels(id.clone()))?;
        lines.push(line);
    }

    let b = match intercept {
        InterceptMode::Shared => {
            lines.iter().map(|l| l.intercept).sum::<f64>() / lines.len() as f64
        }
        InterceptMode::MeanMosAtMinimalDistortion => {
            let q_min = records
                .iter()
                .map(|r| r.features.tqp)
                .fold(f64::INFINITY, f64::min);
            let at_min: Vec<f64> = records
                .iter()
                .filter(|r| r.features.tqp == q_min)
                .map(|r| r.mos)
                .collect();
            at_min.iter().sum::<f64>() / at_min.len() as f64
        }
    };

    let mut per_content = Vec::with_capacity(contents.len());
    let mut mos_rss = 0.0;
    for (id, members) in &contents {
        // Least-squares slope with the intercept pinned to the shared b.
        let (num, den) = members.iter().fold((0.0, 0.0), |(n, d), r| {
            let q = r.features.tqp;
            (n + q * (r.mos - b), d + q * q)
        });
        let slope = num / den;
        mos_rss += members
            .iter()
            .map(|r| (r.mos - (slope * r.features.tqp + b)).powi(2))
            .sum::<f64>();
        let tc = match tc_source {
            TcSource::Estimated => {
                members
                    .iter()
                    .map(|r| estimated_tc(r, tc_coefficients))
                    .sum::<f64>()
                    / members.len() as f64
            }
            _ => {
                let refs: Vec<f64> = members.iter().filter_map(|r| r.tc_ref).collect();
                if refs.is_empty() {
                    return Err(FitError::MissingReferenceTc(id.clone()));
                }
                refs.iter().sum::<f64>() / refs.len() as f64
            }
        };
        per_content.push(ContentSlope {
            content_id: id.clone(),
            slope,
            tc,
        });
    }

    let tcs: Vec<f64> = per_content.iter().map(|c| c.tc).collect();
    let slopes: Vec<f64> = per_content.iter().map(|c| c.slope).collect();
    let ab = fit_linear(&tcs, &slopes).map_err(|_| {
        FitError::DegenerateDesign("all contents share the same texture complexity".into())
    })?;
    Ok(TextureFit {
        alpha: ab.slope,
        beta: ab.intercept,
        b,
        per_content,
        mos_rss,
        slope_rss: ab.rss,
        tc_source,
    })
}
