//! Medoid-shift and neighborhood-representative scoring.
//!
//! Neighborhoods always contain the point itself: a neighborhood of size
//! `k` is the point plus its `k - 1` nearest other points. With `k = 1`
//! every point is its own medoid and the whole pipeline is the identity.
//!
//! One shift iteration computes every medoid on the pre-iteration matrix
//! and then replaces all rows at once.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::dataset::row_key;
use crate::detectors::OutlierScores;
use crate::error::{Error, Result};
use crate::neighbors::{dist, Backend, NeighborIndex, NeighborList};

/// Default number of medoid-shift iterations before scoring.
pub const DEFAULT_ITERATIONS: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    /// Matrix after `iterations` shifts; same shape as the input.
    pub shifted: Array2<f64>,
    /// For medoid-shift, the input row every shifted row was copied from.
    /// `None` for mean-shift, whose rows are synthesized.
    pub origin: Option<Vec<usize>>,
    pub iterations: usize,
}

/// The member of `subset` with the smallest sum of distances to all other
/// members. Ties go to the lowest index.
pub fn medoid(subset: &[usize], x: ArrayView2<'_, f64>) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("medoid of an empty subset".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= x.nrows()) {
        return Err(Error::InvalidParameter(format!("point index {bad} out of range")));
    }
    let mut members = subset.to_vec();
    members.sort_unstable();
    members.dedup();
    let x = x.as_standard_layout();
    Ok(medoid_sorted(&members, &x.view()))
}

fn medoid_sorted(members: &[usize], x: &ArrayView2<'_, f64>) -> usize {
    if members.len() == 1 {
        return members[0];
    }
    let rows: Vec<&[f64]> = members
        .iter()
        .map(|&i| crate::neighbors::row(x, i))
        .collect();
    let mut best = (f64::INFINITY, members[0]);
    for (a, &ia) in members.iter().enumerate() {
        let total: f64 = rows.iter().map(|rb| dist(rows[a], rb)).sum();
        if total < best.0 {
            best = (total, ia);
        }
    }
    best.1
}

fn check_shift_k(k: usize, n: usize) -> Result<()> {
    Error::check_k(k, 1, n)
}

/// Replaces every point by the medoid of its size-`k` neighborhood,
/// `iterations` times.
pub fn medoid_shift(
    x: ArrayView2<'_, f64>,
    k: usize,
    iterations: usize,
    backend: Backend,
) -> Result<ShiftResult> {
    medoid_shift_seeded(x, k, iterations, backend, None)
}

/// [`medoid_shift`] where the first iteration may reuse self-excluding
/// neighbor lists of `x` holding at least `k - 1` entries each.
pub(crate) fn medoid_shift_seeded(
    x: ArrayView2<'_, f64>,
    k: usize,
    iterations: usize,
    backend: Backend,
    first: Option<&[NeighborList]>,
) -> Result<ShiftResult> {
    let n = x.nrows();
    check_shift_k(k, n)?;
    let mut cur = x.as_standard_layout().into_owned();
    let mut origin: Vec<usize> = (0..n).collect();
    for it in 0..iterations {
        if k == 1 {
            break;
        }
        let view = cur.view();
        let medoids: Vec<usize> = match first.filter(|t| it == 0 && t.len() == n) {
            Some(table) => table
                .par_iter()
                .enumerate()
                .map(|(i, l)| {
                    let mut members: Vec<usize> = std::iter::once(i)
                        .chain(l.indices[..k - 1].iter().copied())
                        .collect();
                    members.sort_unstable();
                    medoid_sorted(&members, &view)
                })
                .collect(),
            None => {
                let index = NeighborIndex::build(view, backend)?;
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut members = index
                            .knn_query(i, k, true)
                            .expect("k validated")
                            .indices;
                        members.sort_unstable();
                        medoid_sorted(&members, &view)
                    })
                    .collect()
            }
        };
        let mut next = Array2::zeros(cur.raw_dim());
        for (i, &m) in medoids.iter().enumerate() {
            next.row_mut(i).assign(&cur.row(m));
        }
        origin = medoids.iter().map(|&m| origin[m]).collect();
        cur = next;
    }
    Ok(ShiftResult {
        shifted: cur,
        origin: Some(origin),
        iterations,
    })
}

/// Replaces every point by the mean of its size-`k` neighborhood,
/// `iterations` times.
pub fn mean_shift(
    x: ArrayView2<'_, f64>,
    k: usize,
    iterations: usize,
    backend: Backend,
) -> Result<ShiftResult> {
    let n = x.nrows();
    check_shift_k(k, n)?;
    let d = x.ncols();
    let mut cur = x.as_standard_layout().into_owned();
    for _ in 0..iterations {
        let next_rows: Vec<Vec<f64>> = {
            let index = NeighborIndex::build(cur.view(), backend)?;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let list = index.knn_query(i, k, true).expect("k validated");
                    let mut mean = vec![0.0; d];
                    for &j in &list.indices {
                        for (m, v) in mean.iter_mut().zip(index.row(j)) {
                            *m += v;
                        }
                    }
                    mean.iter_mut().for_each(|m| *m /= k as f64);
                    mean
                })
                .collect()
        };
        cur = Array2::from_shape_vec((n, d), next_rows.concat()).expect("shape preserved");
    }
    Ok(ShiftResult {
        shifted: cur,
        origin: None,
        iterations,
    })
}

/// Unique representative points and the point-to-representative map.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeAssignment {
    /// `m × d` matrix of pairwise distinct rows, in order of first use.
    pub representatives: Array2<f64>,
    /// For every input point, the row of `representatives` it maps to.
    pub assignment: Vec<usize>,
    /// For every representative, the input row it was copied from.
    pub source: Vec<usize>,
}

impl RepresentativeAssignment {
    pub fn n_representatives(&self) -> usize {
        self.representatives.nrows()
    }

    /// Spreads one score per representative to every input point.
    pub fn propagate(&self, rep_scores: &[f64]) -> Result<OutlierScores> {
        if rep_scores.len() != self.n_representatives() {
            return Err(Error::LengthMismatch {
                expected: self.n_representatives(),
                found: rep_scores.len(),
            });
        }
        OutlierScores::new(self.assignment.iter().map(|&j| rep_scores[j]).collect())
    }
}

/// Groups the rows of a medoid-shift result into unique representatives.
pub fn representatives_from_shift(shift: &ShiftResult) -> RepresentativeAssignment {
    let origin = shift
        .origin
        .as_ref()
        .expect("representatives come from a medoid shift");
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut source = Vec::new();
    let mut assignment = Vec::with_capacity(origin.len());
    for (i, row) in shift.shifted.outer_iter().enumerate() {
        let next = source.len();
        let j = *seen.entry(row_key(row.iter().copied())).or_insert(next);
        if j == next {
            source.push(origin[i]);
        }
        assignment.push(j);
    }
    let firsts: Vec<usize> = {
        let mut f = vec![usize::MAX; source.len()];
        for (i, &j) in assignment.iter().enumerate() {
            if f[j] == usize::MAX {
                f[j] = i;
            }
        }
        f
    };
    let representatives = shift.shifted.select(ndarray::Axis(0), &firsts);
    RepresentativeAssignment {
        representatives,
        assignment,
        source,
    }
}

/// Representatives after a single medoid-shift iteration.
pub fn select_representatives(x: ArrayView2<'_, f64>, k: usize) -> Result<RepresentativeAssignment> {
    NeighborhoodRepresentative::new(k).select(x)
}

/// Scores the representatives of `x` with `detector` and gives every
/// point its representative's score.
pub fn nr_score<F>(x: ArrayView2<'_, f64>, k: usize, detector: F) -> Result<OutlierScores>
where
    F: FnOnce(ArrayView2<'_, f64>) -> Result<OutlierScores>,
{
    NeighborhoodRepresentative::new(k).score(x, detector)
}

/// Configured neighborhood-representative pre-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodRepresentative {
    pub k: usize,
    pub iterations: usize,
    pub backend: Backend,
}

impl NeighborhoodRepresentative {
    pub fn new(k: usize) -> Self {
        NeighborhoodRepresentative {
            k,
            iterations: DEFAULT_ITERATIONS,
            backend: Backend::Auto,
        }
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn select(&self, x: ArrayView2<'_, f64>) -> Result<RepresentativeAssignment> {
        self.select_seeded(x, None)
    }

    pub(crate) fn select_seeded(
        &self,
        x: ArrayView2<'_, f64>,
        first: Option<&[NeighborList]>,
    ) -> Result<RepresentativeAssignment> {
        if self.k == 0 {
            return Err(Error::KOutOfRange {
                k: 0,
                min: 1,
                max: x.nrows(),
            });
        }
        let shift = medoid_shift_seeded(x, self.k, self.iterations, self.backend, first)?;
        Ok(representatives_from_shift(&shift))
    }

    pub fn score<F>(&self, x: ArrayView2<'_, f64>, detector: F) -> Result<OutlierScores>
    where
        F: FnOnce(ArrayView2<'_, f64>) -> Result<OutlierScores>,
    {
        let reps = self.select(x)?;
        let rep_scores = detector(reps.representatives.view())?;
        reps.propagate(&rep_scores)
    }
}
