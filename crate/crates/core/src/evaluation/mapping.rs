//! Five-parameter logistic-plus-linear mapping of objective scores onto MOS:
//! `f(x) = p1·(0.5 − 1/(1 + e^(p2·(x − p3)))) + p4·x + p5`.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::calibration::fit_linear;
use crate::optim::{levenberg_marquardt, LmConfig};

pub const MIN_MAPPING_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub params: [f64; 5],
    pub mapped: Vec<f64>,
    /// `mos − mapped`.
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub warning: Option<String>,
}

pub fn logistic5(p: &[f64], x: f64) -> f64 {
    p[0] * (0.5 - 1.0 / (1.0 + (p[1] * (x - p[2])).exp())) + p[3] * x + p[4]
}

fn residuals_and_jacobian(p: &[f64], xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut r = Vec::with_capacity(xs.len());
    let mut jac = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let e = (p[1] * (x - p[2])).exp();
        let s = 1.0 / (1.0 + e);
        // d/dz of -1/(1+e^z) is s·(1 − s).
        let ds = if e.is_finite() { s * (1.0 - s) } else { 0.0 };
        r.push(logistic5(p, x) - y);
        jac.push(vec![
            0.5 - s,
            p[0] * ds * (x - p[2]),
            -p[0] * ds * p[1],
            x,
            1.0,
        ]);
    }
    (r, jac)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Fits the mapping by damped Gauss–Newton from two starts (the linear
/// least-squares fit with no logistic term, and a pure logistic spanning
/// the MOS range) and keeps the better one. When neither run converges the
/// identity mapping is returned with a warning.
pub fn nonlinear_map(objective: &[f64], mos: &[f64]) -> Result<Mapping, EvalError> {
    if objective.len() != mos.len() {
        return Err(EvalError::LengthMismatch(objective.len(), mos.len()));
    }
    if objective.len() < MIN_MAPPING_POINTS {
        return Err(EvalError::TooFewPoints {
            needed: MIN_MAPPING_POINTS,
            got: objective.len(),
        });
    }
    let (xmin, xmax) = objective
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let (ymin, ymax) = mos
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| {
            (a.min(y), b.max(y))
        });
    let xspan = (xmax - xmin).max(f64::EPSILON);
    let ymean = mos.iter().sum::<f64>() / mos.len() as f64;
    let xmid = median(objective);

    let mut starts = Vec::new();
    if let Ok(line) = fit_linear(objective, mos) {
        starts.push([0.0, 4.0 / xspan, xmid, line.slope, line.intercept]);
        let sign = if line.slope < 0.0 { -1.0 } else { 1.0 };
        starts.push([ymax - ymin, sign * 4.0 / xspan, xmid, 0.0, ymean]);
    } else {
        starts.push([0.0, 4.0 / xspan, xmid, 0.0, ymean]);
    }

    let config = LmConfig {
        max_iterations: 1000,
        ..LmConfig::default()
    };
    let best = starts
        .iter()
        .map(|s| levenberg_marquardt(|p| residuals_and_jacobian(p, objective, mos), s, config))
        .filter(|r| r.rss.is_finite())
        .min_by(|a, b| a.rss.total_cmp(&b.rss));

    let (params, converged, warning) = match best {
        Some(r) if r.converged => (
            [
                r.params[0],
                r.params[1],
                r.params[2],
                r.params[3],
                r.params[4],
            ],
            true,
            None,
        ),
        _ => (
            [0.0, 1.0, 0.0, 1.0, 0.0],
            false,
            Some("nonlinear mapping did not converge; identity mapping used".to_string()),
        ),
    };
    let mapped: Vec<f64> = objective.iter().map(|&x| logistic5(&params, x)).collect();
    let residuals: Vec<f64> = mos.iter().zip(&mapped).map(|(y, m)| y - m).collect();
    let rss = residuals.iter().map(|r| r * r).sum();
    Ok(Mapping {
        params,
        mapped,
        residuals,
        rss,
        converged,
        warning,
    })
}
