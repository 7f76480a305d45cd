use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{ArrayView2, Axis};

use super::OutlierScores;
use crate::error::{Error, Result};

pub const PCAD_VARIANCE_FLOOR: f64 = 1e-10;

/// Sum of squared projections onto the principal axes, each divided by
/// its eigenvalue. Axes with eigenvalue at or below `variance_floor` are
/// skipped.
pub fn score_pcad(x: ArrayView2<'_, f64>, variance_floor: f64) -> Result<OutlierScores> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::InvalidData("PCAD needs at least 2 points".into()));
    }
    if !(variance_floor > 0.0) {
        return Err(Error::InvalidParameter("variance floor must be positive".into()));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - mean[j]);
    let cov = centered.tr_mul(&centered) / n as f64;
    let eig = SymmetricEigen::new(cov);
    let kept: Vec<usize> = (0..d).filter(|&j| eig.eigenvalues[j] > variance_floor).collect();
    let projected = &centered * &eig.eigenvectors;
    let scores = (0..n)
        .map(|i| {
            kept.iter()
                .map(|&j| projected[(i, j)].powi(2) / eig.eigenvalues[j])
                .sum()
        })
        .collect();
    OutlierScores::new(scores)
}
