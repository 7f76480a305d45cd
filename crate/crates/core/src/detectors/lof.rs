use ndarray::ArrayView2;

use super::{neighbor_table, OutlierScores};
use crate::error::{Error, Result};
use crate::neighbors::{Backend, NeighborList};

/// Floor on the mean reachability distance. Keeps the local reachability
/// density finite when a point's neighbors all coincide with it.
pub const REACH_FLOOR: f64 = 1e-10;

/// Local outlier factor over the `k` nearest other points.
pub fn score_lof(x: ArrayView2<'_, f64>, k: usize) -> Result<OutlierScores> {
    score_lof_with(x, k, Backend::Auto)
}

pub fn score_lof_with(x: ArrayView2<'_, f64>, k: usize, backend: Backend) -> Result<OutlierScores> {
    let table = neighbor_table(x, k, backend)?;
    lof_from_table(&table, k)
}

pub(crate) fn lof_from_table(table: &[NeighborList], k: usize) -> Result<OutlierScores> {
    Error::check_k(k, 1, table.len().saturating_sub(1))?;
    let k_distance: Vec<f64> = table.iter().map(|l| l.distances[k - 1]).collect();
    let lrd: Vec<f64> = table
        .iter()
        .map(|l| {
            let reach: f64 = l.indices[..k]
                .iter()
                .zip(&l.distances[..k])
                .map(|(&o, &d)| k_distance[o].max(d))
                .sum();
            1.0 / (reach / k as f64).max(REACH_FLOOR)
        })
        .collect();
    let scores = table
        .iter()
        .zip(&lrd)
        .map(|(l, &own)| {
            let neighbors: f64 = l.indices[..k].iter().map(|&o| lrd[o]).sum();
            neighbors / k as f64 / own
        })
        .collect();
    OutlierScores::new(scores)
}
