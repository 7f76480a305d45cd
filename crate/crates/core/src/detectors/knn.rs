use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{neighbor_table, OutlierScores};
use crate::error::{Error, Result};
use crate::neighbors::{Backend, NeighborList};

/// How the distances to the `k` nearest neighbors become one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnAggregate {
    /// Distance to the `k`-th nearest other point.
    Kth,
    /// Mean distance to the `k` nearest other points.
    Mean,
}

/// Distance-based score over the `k` nearest other points.
pub fn score_knn(x: ArrayView2<'_, f64>, k: usize, aggregate: KnnAggregate) -> Result<OutlierScores> {
    score_knn_with(x, k, aggregate, Backend::Auto)
}

pub fn score_knn_with(
    x: ArrayView2<'_, f64>,
    k: usize,
    aggregate: KnnAggregate,
    backend: Backend,
) -> Result<OutlierScores> {
    let table = neighbor_table(x, k, backend)?;
    knn_from_table(&table, k, aggregate)
}

pub(crate) fn knn_from_table(
    table: &[NeighborList],
    k: usize,
    aggregate: KnnAggregate,
) -> Result<OutlierScores> {
    Error::check_k(k, 1, table.len().saturating_sub(1))?;
    let scores = table
        .iter()
        .map(|l| match aggregate {
            KnnAggregate::Kth => l.distances[k - 1],
            KnnAggregate::Mean => l.distances[..k].iter().sum::<f64>() / k as f64,
        })
        .collect();
    OutlierScores::new(scores)
}
