//! Small dense solvers shared by the curve fits.

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-14` relative to the largest
/// entry of `a`.
#[allow(clippy::needless_range_loop)]
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step changes RSS by less than this fraction.
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Gauss–Newton (Levenberg–Marquardt with Marquardt's diagonal
/// scaling) for small least-squares problems.
///
/// `model` returns the residual vector and the Jacobian (one row per
/// residual) at a parameter vector. The best point seen is always returned;
/// `converged` reports whether the stopping rule fired before the
/// iteration cap.
pub fn levenberg_marquardt<F>(mut model: F, start: &[f64], config: LmConfig) -> LmResult
where
    F: FnMut(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>),
{
    let n = start.len();
    let mut x = start.to_vec();
    let (mut r, mut jac) = model(&x);
    let mut rss = sum_squares(&r);
    let mut lambda = config.initial_damping;
    let mut iterations = 0;

    if !rss.is_finite() {
        return LmResult {
            params: x,
            rss,
            iterations,
            converged: false,
        };
    }

    while iterations < config.max_iterations {
        iterations += 1;
        if rss == 0.0 {
            return LmResult {
                params: x,
                rss,
                iterations,
                converged: true,
            };
        }
        let (jtj, jtr) = normal_equations(&jac, &r, n);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            if let Some(step) = solve_linear(damped, rhs) {
                let candidate: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
                let (r_new, jac_new) = model(&candidate);
                let rss_new = sum_squares(&r_new);
                if rss_new.is_finite() && rss_new < rss {
                    let change = (rss - rss_new) / rss;
                    x = candidate;
                    r = r_new;
                    jac = jac_new;
                    rss = rss_new;
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    if change < config.relative_tolerance {
                        return LmResult {
                            params: x,
                            rss,
                            iterations,
                            converged: true,
                        };
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left at any damping: a stationary point.
            return LmResult {
                params: x,
                rss,
                iterations,
                converged: true,
            };
        }
    }
    LmResult {
        params: x,
        rss,
        iterations,
        converged: false,
    }
}

#[allow(clippy::needless_range_loop)]
fn normal_equations(jac: &[Vec<f64>], r: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut jtj = vec![vec![0.0; n]; n];
    let mut jtr = vec![0.0; n];
    for (row, ri) in jac.iter().zip(r) {
        for i in 0..n {
            jtr[i] += row[i] * ri;
            for j in i..n {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            jtj[i][j] = jtj[j][i];
        }
    }
    (jtj, jtr)
}

pub(crate) fn sum_squares(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let x = solve_linear(
            vec![
                vec![2.0, 1.0, -1.0],
                vec![-3.0, -1.0, 2.0],
                vec![-2.0, 1.0, 2.0],
            ],
            vec![8.0, -11.0, -3.0],
        )
        .unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_system() {
        assert!(solve_linear(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn fits_exponential_decay() {
        let ts: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * (-0.7 * t).exp() + 0.5).collect();
        let result = levenberg_marquardt(
            |p| {
                let r = ts
                    .iter()
                    .zip(&ys)
                    .map(|(t, y)| p[0] * (p[1] * t).exp() + p[2] - y)
                    .collect();
                let j = ts
                    .iter()
                    .map(|t| {
                        let e = (p[1] * t).exp();
                        vec![e, p[0] * t * e, 1.0]
                    })
                    .collect();
                (r, j)
            },
            &[1.0, -0.1, 0.0],
            LmConfig::default(),
        );
        assert!(result.converged);
        assert!(result.rss < 1e-16, "rss {}", result.rss);
        assert!((result.params[1] + 0.7).abs() < 1e-6);
    }
}
