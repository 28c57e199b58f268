use serde::{Deserialize, Serialize};

use super::FitError;
use crate::optim::solve_linear;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rss: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Coefficients of `a1·x² + a2·x + a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub rss: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a1 * x * x + self.a2 * x + self.a3
    }
}

fn distinct(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_lengths(xs: &[f64], ys: &[f64], stage: &str) -> Result<(), FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch {
            stage: stage.to_owned(),
        });
    }
    Ok(())
}

/// Ordinary least squares line through `(xs, ys)`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit, FitError> {
    check_lengths(xs, ys, "linear")?;
    if distinct(xs) < 2 {
        return Err(FitError::DegenerateDesign(
            "linear fit needs two distinct x values".into(),
        ));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (sxx, sxy) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxx, sxy), (x, y)| {
        let dx = x - mx;
        (sxx + dx * dx, sxy + dx * (y - my))
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rss,
    })
}

/// Least-squares quadratic. The normal equations are formed on the
/// centred and scaled abscissa and mapped back, which keeps the 3×3 system
/// well conditioned for abscissae such as QP values far from zero.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<QuadraticFit, FitError> {
    check_lengths(xs, ys, "quadratic")?;
    if distinct(xs) < 3 {
        return Err(FitError::DegenerateDesign(
            "quadratic fit needs three distinct x values".into(),
        ));
    }
    let m = mean(xs);
    let s = xs.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
    let us: Vec<f64> = xs.iter().map(|x| (x - m) / s).collect();
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut aty = vec![0.0; 3];
    for (u, y) in us.iter().zip(ys) {
        let row = [1.0, *u, u * u];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let c = solve_linear(ata, aty)
        .ok_or_else(|| FitError::DegenerateDesign("singular quadratic normal equations".into()))?;
    let a1 = c[2] / (s * s);
    let a2 = c[1] / s - 2.0 * c[2] * m / (s * s);
    let a3 = c[0] - c[1] * m / s + c[2] * m * m / (s * s);
    // Residuals from the scaled basis, which is what the solve minimized.
    let rss = us
        .iter()
        .zip(ys)
        .map(|(u, y)| (y - (c[0] + c[1] * u + c[2] * u * u)).powi(2))
        .sum();
    Ok(QuadraticFit { a1, a2, a3, rss })
}
