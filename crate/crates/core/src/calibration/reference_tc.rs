//! Reference texture complexity of a source cloud: the mean, over every
//! point, of the sample standard deviation of BT.601 luma within its k
//! nearest neighbours (the point itself included).

use std::num::NonZeroUsize;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rayon::prelude::*;

use super::FitError;

/// Default neighbourhood size.
pub const DEFAULT_K: usize = 16;

/// ITU-R BT.601 luma from RGB.
pub fn luma(rgb: [f64; 3]) -> f64 {
    0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
}

fn sample_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

pub fn compute_reference_tc(
    colors: &[[f64; 3]],
    positions: &[[f64; 3]],
    k: usize,
) -> Result<f64, FitError> {
    if colors.len() != positions.len() {
        return Err(FitError::LengthMismatch {
            stage: "reference tc".into(),
        });
    }
    if positions.is_empty() {
        return Err(FitError::EmptyCloud);
    }
    if k < 2 {
        return Err(FitError::InvalidNeighborhood(k));
    }
    if positions.len() < k {
        return Err(FitError::TooFewPoints {
            needed: k,
            got: positions.len(),
        });
    }
    let lumas: Vec<f64> = colors.iter().copied().map(luma).collect();
    let tree = ImmutableKdTree::new_from_slice(positions)
        .map_err(|e| FitError::Ply(format!("k-d tree construction failed: {e:?}")))?;
    let k_nz = NonZeroUsize::new(k).expect("k >= 2");
    let stds: Vec<f64> = positions
        .par_iter()
        .map(|p| {
            let neighbours = tree
                .query(p)
                .nearest_n::<SquaredEuclidean<f64>>(k_nz)
                .execute();
            sample_std(neighbours.iter().map(|n| lumas[n.item as usize]))
        })
        .collect();
    Ok(stds.iter().sum::<f64>() / stds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn uniform_color_is_zero() {
        let pos: Vec<[f64; 3]> = (0..50)
            .map(|i| [i as f64, (i * 7 % 5) as f64, 0.0])
            .collect();
        let col = vec![[120.0, 30.0, 200.0]; 50];
        let tc = compute_reference_tc(&col, &pos, 8).unwrap();
        assert!(tc.abs() < 1e-9, "{tc}");
    }

    #[test]
    fn two_points() {
        let tc = compute_reference_tc(
            &[[0.0; 3], [10.0; 3]],
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            2,
        )
        .unwrap();
        assert!((tc - 50f64.sqrt()).abs() < 1e-9, "{tc}");
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            compute_reference_tc(&[], &[], 4),
            Err(FitError::EmptyCloud)
        ));
        assert!(matches!(
            compute_reference_tc(&[[0.0; 3]; 3], &[[0.0; 3]; 3], 4),
            Err(FitError::TooFewPoints { needed: 4, got: 3 })
        ));
    }

    /// I.i.d. luma: each neighbourhood std estimates σ with bias factor c4(k).
    #[test]
    fn iid_luma_matches_small_sample_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = 20.0;
        let noise = Normal::new(128.0, sigma).unwrap();
        let n = 1000;
        let pos: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                [
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                ]
            })
            .collect();
        let col: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let y = noise.sample(&mut rng);
                [y, y, y]
            })
            .collect();
        let k = 16;
        let tc = compute_reference_tc(&col, &pos, k).unwrap();
        // c4(k) = sqrt(2/(k-1)) Γ(k/2) / Γ((k-1)/2)
        let kf = k as f64;
        let c4 = (2.0 / (kf - 1.0)).sqrt()
            * (statrs::function::gamma::ln_gamma(kf / 2.0)
                - statrs::function::gamma::ln_gamma((kf - 1.0) / 2.0))
            .exp();
        let expected = c4 * sigma;
        assert!(
            (tc - expected).abs() / expected < 0.10,
            "{tc} vs {expected}"
        );
    }
}
