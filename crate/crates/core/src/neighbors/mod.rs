//! Exact Euclidean k-nearest-neighbor search.
//!
//! Three interchangeable backends return identical results: brute force,
//! a KD-tree and a ball tree. Results are ordered by distance; equal
//! distances are ordered by ascending point index, except that when the
//! query point itself is requested it always comes first.

mod ball;
mod heap;
mod kd;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use heap::Candidates;

/// Leaf size used by both trees unless overridden.
pub const DEFAULT_LEAF_SIZE: usize = 16;

/// Highest dimension for which [`Backend::Auto`] picks the KD-tree.
pub const KD_MAX_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Auto,
    Brute,
    Kd,
    Ball,
}

impl Backend {
    /// Concrete backend for data of dimension `d`.
    pub fn resolve(self, d: usize) -> Backend {
        match self {
            Backend::Auto if d <= KD_MAX_DIM => Backend::Kd,
            Backend::Auto => Backend::Ball,
            other => other,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Brute => "brute",
            Backend::Kd => "kd",
            Backend::Ball => "ball",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Backend::Auto),
            "brute" => Ok(Backend::Brute),
            "kd" | "kd-tree" | "kdtree" => Ok(Backend::Kd),
            "ball" | "ball-tree" | "balltree" => Ok(Backend::Ball),
            other => Err(Error::InvalidParameter(format!("unknown backend `{other}`"))),
        }
    }
}

/// The `k` nearest points to a query, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Distance to the farthest kept neighbor.
    pub fn kth_distance(&self) -> f64 {
        *self.distances.last().expect("non-empty neighbor list")
    }

    pub fn truncated(&self, k: usize) -> NeighborList {
        let k = k.min(self.len());
        NeighborList {
            indices: self.indices[..k].to_vec(),
            distances: self.distances[..k].to_vec(),
        }
    }
}

/// Squared Euclidean distance, accumulated in coordinate order.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

enum Tree {
    Brute,
    Kd(kd::KdTree),
    Ball(ball::BallTree),
}

/// Immutable search structure over the rows of a matrix.
pub struct NeighborIndex<'a> {
    points: ArrayView2<'a, f64>,
    backend: Backend,
    tree: Tree,
}

impl<'a> NeighborIndex<'a> {
    pub fn build(points: ArrayView2<'a, f64>, backend: Backend) -> Result<Self> {
        Self::with_leaf_size(points, backend, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(
        points: ArrayView2<'a, f64>,
        backend: Backend,
        leaf_size: usize,
    ) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(Error::Empty("cannot index an empty matrix".into()));
        }
        if !points.is_standard_layout() {
            return Err(Error::InvalidData("matrix must be row-major".into()));
        }
        let leaf_size = leaf_size.max(1);
        let backend = backend.resolve(d);
        let tree = match backend {
            Backend::Brute => Tree::Brute,
            Backend::Kd => Tree::Kd(kd::KdTree::build(points, leaf_size)),
            Backend::Ball => Tree::Ball(ball::BallTree::build(points, leaf_size)),
            Backend::Auto => unreachable!("resolved above"),
        };
        Ok(NeighborIndex {
            points,
            backend,
            tree,
        })
    }

    /// The concrete backend in use (never [`Backend::Auto`]).
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn points(&self) -> ArrayView2<'a, f64> {
        self.points
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        row(&self.points, i)
    }

    fn check_k(&self, k: usize, include_self: bool) -> Result<()> {
        let n = self.len();
        let max = if include_self { n } else { n - 1 };
        Error::check_k(k, 1, max)
    }

    /// The `k` nearest neighbors of indexed point `query`.
    ///
    /// With `include_self` the query point is the first entry (distance
    /// zero) and counts towards `k`; otherwise it is excluded.
    pub fn knn_query(&self, query: usize, k: usize, include_self: bool) -> Result<NeighborList> {
        if query >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "query index {query} out of range for {} points",
                self.len()
            )));
        }
        self.check_k(k, include_self)?;
        Ok(self.search(query, k, include_self))
    }

    /// [`knn_query`](Self::knn_query) for every indexed point, in index order.
    pub fn knn_all(&self, k: usize, include_self: bool) -> Result<Vec<NeighborList>> {
        self.check_k(k, include_self)?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| self.search(i, k, include_self))
            .collect())
    }

    fn search(&self, query: usize, k: usize, include_self: bool) -> NeighborList {
        let mut cand = Candidates::new(k, query, include_self);
        let q = self.row(query);
        match &self.tree {
            Tree::Brute => {
                for i in 0..self.len() {
                    cand.offer(sq_dist(q, self.row(i)), i);
                }
            }
            Tree::Kd(t) => t.search(&self.points, q, &mut cand),
            Tree::Ball(t) => t.search(&self.points, q, &mut cand),
        }
        cand.into_list()
    }
}

#[inline]
pub(crate) fn row<'v>(points: &'v ArrayView2<'_, f64>, i: usize) -> &'v [f64] {
    let d = points.ncols();
    let flat = points
        .as_slice()
        .expect("standard layout checked at construction");
    &flat[i * d..(i + 1) * d]
}

/// k-NN lists for every row of `points`, built with a fresh index.
pub fn knn_all(
    points: ArrayView2<'_, f64>,
    k: usize,
    include_self: bool,
    backend: Backend,
) -> Result<Vec<NeighborList>> {
    let owned;
    let view = if points.is_standard_layout() {
        points
    } else {
        owned = points.as_standard_layout().into_owned();
        owned.view()
    };
    NeighborIndex::build(view, backend)?.knn_all(k, include_self)
}
