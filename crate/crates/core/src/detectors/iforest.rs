//! Isolation forest with the usual average-path-length normalization.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{unit_rng, OutlierScores};
use crate::error::{Error, Result};

pub const IFOREST_TREES: usize = 100;
pub const IFOREST_SUBSAMPLE: usize = 256;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn harmonic(i: usize) -> f64 {
    if i <= 64 {
        (1..=i).map(|j| 1.0 / j as f64).sum()
    } else {
        let x = i as f64;
        x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
    }
}

/// Average path length of an unsuccessful search in a binary search tree
/// of `m` points; `c(0) = c(1) = 0`.
pub fn average_path_length(m: usize) -> f64 {
    if m <= 1 {
        0.0
    } else {
        2.0 * harmonic(m - 1) - 2.0 * (m - 1) as f64 / m as f64
    }
}

enum Node {
    External {
        size: usize,
    },
    Internal {
        feature: usize,
        split: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

struct IsolationTree {
    root: Node,
}

impl IsolationTree {
    fn grow(x: &ArrayView2<'_, f64>, rows: Vec<usize>, depth: usize, limit: usize, rng: &mut ChaCha8Rng) -> Node {
        if depth >= limit || rows.len() <= 1 {
            return Node::External { size: rows.len() };
        }
        let ranges: Vec<(usize, f64, f64)> = (0..x.ncols())
            .filter_map(|j| {
                let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(x[[i, j]]), hi.max(x[[i, j]]))
                });
                (hi > lo).then_some((j, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return Node::External { size: rows.len() };
        }
        let (feature, lo, hi) = ranges[rng.random_range(0..ranges.len())];
        let split = rng.random_range(lo..hi);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| x[[i, feature]] < split);
        Node::Internal {
            feature,
            split,
            left: Box::new(Self::grow(x, l, depth + 1, limit, rng)),
            right: Box::new(Self::grow(x, r, depth + 1, limit, rng)),
        }
    }

    fn path_length(&self, point: ndarray::ArrayView1<'_, f64>) -> f64 {
        let mut node = &self.root;
        let mut depth = 0usize;
        loop {
            match node {
                Node::External { size } => return depth as f64 + average_path_length(*size),
                Node::Internal {
                    feature,
                    split,
                    left,
                    right,
                } => {
                    node = if point[*feature] < *split { left } else { right };
                    depth += 1;
                }
            }
        }
    }
}

/// Anomaly score `2^(-E[h(x)] / c(ψ))` in `(0, 1)`; 0.5 is neutral.
pub fn score_iforest(x: ArrayView2<'_, f64>, seed: u64, n_trees: usize, subsample: usize) -> Result<OutlierScores> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidData("isolation forest needs at least 2 points".into()));
    }
    if n_trees == 0 || subsample < 2 {
        return Err(Error::InvalidParameter(
            "isolation forest needs n_trees >= 1 and subsample >= 2".into(),
        ));
    }
    let psi = subsample.min(n);
    let limit = (psi as f64).log2().ceil() as usize;
    let trees: Vec<IsolationTree> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = unit_rng(seed, t as u64);
            let rows = sample(&mut rng, n, psi).into_vec();
            IsolationTree {
                root: IsolationTree::grow(&x, rows, 0, limit, &mut rng),
            }
        })
        .collect();
    let norm = average_path_length(psi);
    let scores = (0..n)
        .into_par_iter()
        .map(|i| {
            let total: f64 = trees.iter().map(|t| t.path_length(x.row(i))).sum();
            2f64.powf(-(total / n_trees as f64) / norm)
        })
        .collect();
    OutlierScores::new(scores)
}
