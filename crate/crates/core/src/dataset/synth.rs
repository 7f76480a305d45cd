use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Two-dimensional data with a dense group of collective outliers.
///
/// `n_normal` points are drawn from a unit isotropic Gaussian at the
/// origin (label 0) and `n_outlier` points from an isotropic Gaussian with
/// standard deviation `spread_ratio`, centered at distance `separation`
/// towards the bottom-right (label 1).
pub fn synth_collective(
    n_normal: usize,
    n_outlier: usize,
    separation: f64,
    spread_ratio: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_normal == 0 {
        return Err(Error::InvalidParameter("n_normal must be at least 1".into()));
    }
    if !(separation.is_finite() && spread_ratio.is_finite() && spread_ratio > 0.0) {
        return Err(Error::InvalidParameter(
            "separation must be finite and spread_ratio positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_normal + n_outlier;
    let offset = separation / std::f64::consts::SQRT_2;
    let center = [offset, -offset];
    let spread = Normal::new(0.0, spread_ratio).expect("positive sd");

    let mut data = Array2::zeros((n, 2));
    for i in 0..n {
        for j in 0..2 {
            data[[i, j]] = if i < n_normal {
                StandardNormal.sample(&mut rng)
            } else {
                center[j] + spread.sample(&mut rng)
            };
        }
    }
    let labels = (0..n).map(|i| u8::from(i >= n_normal)).collect();
    LabeledDataset::with_names(
        data,
        Some(labels),
        Some(vec!["x".into(), "y".into()]),
    )
}
