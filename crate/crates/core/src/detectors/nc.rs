use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use rayon::prelude::*;

use super::{neighbor_table, OutlierScores};
use crate::error::{Error, Result};
use crate::neighbors::{row, Backend, NeighborList};

/// Ridge added to the local Gram matrix so affinely dependent
/// neighborhoods remain solvable.
pub const NC_RIDGE: f64 = 1e-8;

/// Number of negative weights when each point is written as an affine
/// combination (weights summing to one) of its `k` nearest other points.
pub fn score_nc(x: ArrayView2<'_, f64>, k: usize) -> Result<OutlierScores> {
    score_nc_with(x, k, Backend::Auto)
}

pub fn score_nc_with(x: ArrayView2<'_, f64>, k: usize, backend: Backend) -> Result<OutlierScores> {
    Error::check_k(k, 2, x.nrows().saturating_sub(1))?;
    let table = neighbor_table(x, k, backend)?;
    nc_from_table(x, &table, k)
}

pub(crate) fn nc_from_table(
    x: ArrayView2<'_, f64>,
    table: &[NeighborList],
    k: usize,
) -> Result<OutlierScores> {
    Error::check_k(k, 2, x.nrows().saturating_sub(1))?;
    let x = x.as_standard_layout();
    let view = x.view();
    let scores = table
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let w = affine_weights(row(&view, i), l.indices[..k].iter().map(|&j| row(&view, j)));
            w.iter().filter(|&&v| v < 0.0).count() as f64
        })
        .collect();
    OutlierScores::new(scores)
}

/// Minimizes `|point - sum_j w_j neighbor_j|^2` subject to `sum_j w_j = 1`.
///
/// With the constraint the residual equals `sum_j w_j (point - neighbor_j)`,
/// so the optimum is `w ∝ G^{-1} 1` for the Gram matrix `G` of the
/// differences.
pub fn affine_weights<'r>(point: &[f64], neighbors: impl Iterator<Item = &'r [f64]>) -> Vec<f64> {
    let diffs: Vec<Vec<f64>> = neighbors
        .map(|nb| point.iter().zip(nb).map(|(p, q)| p - q).collect())
        .collect();
    let k = diffs.len();
    let gram = DMatrix::from_fn(k, k, |a, b| {
        let g: f64 = diffs[a].iter().zip(&diffs[b]).map(|(u, v)| u * v).sum();
        if a == b {
            g + NC_RIDGE
        } else {
            g
        }
    });
    let ones = DVector::from_element(k, 1.0);
    let solved = match gram.clone().cholesky() {
        Some(c) => c.solve(&ones),
        None => gram
            .lu()
            .solve(&ones)
            .unwrap_or_else(|| DVector::from_element(k, 1.0)),
    };
    let total = solved.sum();
    solved.iter().map(|v| v / total).collect()
}
