//! PLCC, SRCC and RMSE.

use super::EvalError;

fn check_pair(xs: &[f64], ys: &[f64], min: usize) -> Result<(), EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < min {
        return Err(EvalError::TooFewPoints {
            needed: min,
            got: xs.len(),
        });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson linear correlation, computed on centred data and clamped to
/// `[-1, 1]`.
pub fn plcc(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    check_pair(xs, ys, 2)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(EvalError::ZeroVariance("first argument"));
    }
    if syy == 0.0 {
        return Err(EvalError::ZeroVariance("second argument"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the positions they occupy.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: PLCC of average ranks.
pub fn srcc(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    check_pair(xs, ys, 2)?;
    plcc(&average_ranks(xs), &average_ranks(ys))
}

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64, EvalError> {
    check_pair(predicted, observed, 1)?;
    let mse = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o).powi(2))
        .sum::<f64>()
        / predicted.len() as f64;
    Ok(mse.sqrt())
}
