use serde::{Deserialize, Serialize};

use super::fit::{fit_linear, fit_quadratic, LinearFit};
use super::{group_by, FitError};
use crate::dataset::DatasetRecord;
use crate::evaluation::metrics::plcc;

/// Coefficients of the slope/intercept polynomials in TQP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TqpGroupFit {
    pub tqp: f64,
    pub records: usize,
    pub line: LinearFit,
    /// PLCC between reference TC and TBPP in this group, when defined.
    pub plcc_tc_tbpp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcModelFit {
    pub coefficients: TcCoefficients,
    pub groups: Vec<TqpGroupFit>,
    pub slope_rss: f64,
    pub intercept_rss: f64,
}

/// Fits TC ≈ s(TQP)·TBPP + i(TQP) from records carrying reference TC.
///
/// Each TQP group gets its own line `tc_ref ~ tbpp`; the group slopes are
/// then fitted by a quadratic in TQP and the intercepts by a line.
pub fn fit_tc_model(records: &[DatasetRecord]) -> Result<TcModelFit, FitError> {
    if let Some(r) = records.iter().find(|r| r.tc_ref.is_none()) {
        return Err(FitError::MissingReferenceTc(r.content_id.clone()));
    }
    let groups = group_by(records, |r| r.features.tqp);
    if groups.len() < 3 {
        return Err(FitError::DegenerateDesign(format!(
            "TC model needs at least 3 TQP levels, found {}",
            groups.len()
        )));
    }
    let mut fits = Vec::with_capacity(groups.len());
    for (tqp, members) in &groups {
        let tbpp: Vec<f64> = members.iter().map(|r| r.features.tbpp).collect();
        let tc: Vec<f64> = members
            .iter()
            .map(|r| r.tc_ref.unwrap_or_default())
            .collect();
        let line = fit_linear(&tbpp, &tc).map_err(|_| {
            FitError::DegenerateDesign(format!("TQP {tqp}: needs two records with distinct TBPP"))
        })?;
        fits.push(TqpGroupFit {
            tqp: *tqp,
            records: members.len(),
            line,
            plcc_tc_tbpp: plcc(&tc, &tbpp).ok(),
        });
    }
    let tqps: Vec<f64> = fits.iter().map(|g| g.tqp).collect();
    let slopes: Vec<f64> = fits.iter().map(|g| g.line.slope).collect();
    let intercepts: Vec<f64> = fits.iter().map(|g| g.line.intercept).collect();
    let s = fit_quadratic(&tqps, &slopes)?;
    let i = fit_linear(&tqps, &intercepts)?;
    Ok(TcModelFit {
        coefficients: TcCoefficients {
            a1: s.a1,
            a2: s.a2,
            a3: s.a3,
            b1: i.slope,
            b2: i.intercept,
        },
        groups: fits,
        slope_rss: s.rss,
        intercept_rss: i.rss,
    })
}
