use serde::{Deserialize, Serialize};

use super::fit::fit_linear;
use super::FitError;
use crate::optim::{levenberg_marquardt, LmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationFit {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl AttenuationFit {
    pub fn eval(&self, tnsl: f64) -> f64 {
        logistic(tnsl, self.l1, self.l2, self.l3)
    }
}

fn sigmoid(t: f64, l2: f64) -> f64 {
    1.0 / (1.0 + (t + l2).exp())
}

fn logistic(t: f64, l1: f64, l2: f64, l3: f64) -> f64 {
    l1 * sigmoid(t, l2) + l3
}

const GRID_LO: f64 = -15.0;
const GRID_HI: f64 = 5.0;
const GRID_STEPS: usize = 400;

/// Fits `l1 / (1 + e^(t + l2)) + l3` to `(tnsl, attenuation)` samples.
///
/// Starts from the best point of a grid over `l2 ∈ [-15, 5]` with `l1`,
/// `l3` solved linearly, then refines all three by damped Gauss–Newton.
/// A fit that hits the iteration cap is returned with `converged = false`.
pub fn fit_geometry_attenuation(
    samples: &[(f64, f64)],
    config: LmConfig,
) -> Result<AttenuationFit, FitError> {
    let mut ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 3 {
        return Err(FitError::DegenerateDesign(format!(
            "attenuation fit needs 3 distinct tNSL levels, found {}",
            ts.len()
        )));
    }
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let rss_of = |l1: f64, l2: f64, l3: f64| -> f64 {
        samples
            .iter()
            .map(|&(t, y)| (logistic(t, l1, l2, l3) - y).powi(2))
            .sum()
    };

    let mut best: Option<(f64, [f64; 3])> = None;
    for step in 0..=GRID_STEPS {
        let l2 = GRID_LO + (GRID_HI - GRID_LO) * step as f64 / GRID_STEPS as f64;
        let g: Vec<f64> = samples.iter().map(|s| sigmoid(s.0, l2)).collect();
        let Ok(line) = fit_linear(&g, &ys) else {
            continue;
        };
        let rss = rss_of(line.slope, l2, line.intercept);
        if rss.is_finite() && best.is_none_or(|(b, _)| rss < b) {
            best = Some((rss, [line.slope, l2, line.intercept]));
        }
    }
    let (grid_rss, start) = best.unwrap_or_else(|| {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        (rss_of(0.0, 0.0, mean), [0.0, 0.0, mean])
    });

    let result = levenberg_marquardt(
        |p| {
            let mut r = Vec::with_capacity(samples.len());
            let mut jac = Vec::with_capacity(samples.len());
            for &(t, y) in samples {
                let g = sigmoid(t, p[1]);
                r.push(p[0] * g + p[2] - y);
                jac.push(vec![g, -p[0] * g * (1.0 - g), 1.0]);
            }
            (r, jac)
        },
        &start,
        config,
    );
    let (params, rss) = if result.rss <= grid_rss {
        (result.params.clone(), result.rss)
    } else {
        (start.to_vec(), grid_rss)
    };
    Ok(AttenuationFit {
        l1: params[0],
        l2: params[1],
        l3: params[2],
        rss,
        iterations: result.iterations,
        converged: result.converged,
    })
}
