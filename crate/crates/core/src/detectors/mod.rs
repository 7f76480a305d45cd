//! Outlier detectors. Every detector returns one finite score per point,
//! larger meaning more outlying.

mod external;
mod iforest;
mod knn;
mod lof;
mod mcd;
mod mod_shift;
mod nc;
mod odin;
mod pcad;

use std::fmt;
use std::ops::Deref;
use std::path::PathBuf;

use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::{self, Backend, NeighborList};

pub use external::{external_scores, format_scores, parse_scores};
pub use iforest::{average_path_length, score_iforest, IFOREST_SUBSAMPLE, IFOREST_TREES};
pub use knn::{score_knn, score_knn_with, KnnAggregate};
pub use lof::{score_lof, score_lof_with, REACH_FLOOR};
pub use mcd::{fit_mcd, mahalanobis_scores, score_mcd, CStepRecord, McdFit, MCD_MAX_CSTEPS, MCD_STARTS};
pub use mod_shift::{score_mod, score_mod_with, MOD_ITERATIONS};
pub use nc::{affine_weights, score_nc, score_nc_with, NC_RIDGE};
pub use odin::{in_degrees, score_odin, score_odin_with};
pub use pcad::{score_pcad, PCAD_VARIANCE_FLOOR};

/// Length-`n` vector of finite outlier scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutlierScores(Vec<f64>);

impl OutlierScores {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(index) = scores.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(OutlierScores(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest score; the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl Deref for OutlierScores {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<OutlierScores> for Vec<f64> {
    fn from(s: OutlierScores) -> Self {
        s.0
    }
}

/// Neighbor lists excluding the point itself, as used by all
/// k-NN detectors.
pub(crate) fn neighbor_table(x: ArrayView2<'_, f64>, k: usize, backend: Backend) -> Result<Vec<NeighborList>> {
    Error::check_k(k, 1, x.nrows().saturating_sub(1))?;
    neighbors::knn_all(x, k, false, backend)
}

/// Independent RNG stream for unit `unit` (a tree, a random start) of a
/// seeded detector.
pub(crate) fn unit_rng(seed: u64, unit: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit);
    rng
}

/// Detector identity and detector-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Detector {
    Knn { aggregate: KnnAggregate },
    Lof,
    Odin,
    Nc,
    Mod { iterations: usize },
    Mcd { n_starts: usize, max_csteps: usize },
    Iforest { n_trees: usize, subsample: usize },
    Pcad { variance_floor: f64 },
    External { path: PathBuf },
}

/// Names accepted by [`Detector::from_name`], in reporting order.
pub const DETECTOR_NAMES: [&str; 8] = ["mod", "lof", "odin", "nc", "knn", "mcd", "iforest", "pcad"];

impl Detector {
    /// Detector with its default parameters. `external` needs a path and is
    /// built directly instead.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "knn" => Detector::Knn {
                aggregate: KnnAggregate::Kth,
            },
            "knn-mean" | "avgknn" => Detector::Knn {
                aggregate: KnnAggregate::Mean,
            },
            "lof" => Detector::Lof,
            "odin" => Detector::Odin,
            "nc" => Detector::Nc,
            "mod" => Detector::Mod {
                iterations: MOD_ITERATIONS,
            },
            "mcd" => Detector::Mcd {
                n_starts: MCD_STARTS,
                max_csteps: MCD_MAX_CSTEPS,
            },
            "iforest" => Detector::Iforest {
                n_trees: IFOREST_TREES,
                subsample: IFOREST_SUBSAMPLE,
            },
            "pcad" => Detector::Pcad {
                variance_floor: PCAD_VARIANCE_FLOOR,
            },
            other => return Err(Error::InvalidParameter(format!("unknown detector `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Knn {
                aggregate: KnnAggregate::Kth,
            } => "knn",
            Detector::Knn {
                aggregate: KnnAggregate::Mean,
            } => "knn-mean",
            Detector::Lof => "lof",
            Detector::Odin => "odin",
            Detector::Nc => "nc",
            Detector::Mod { .. } => "mod",
            Detector::Mcd { .. } => "mcd",
            Detector::Iforest { .. } => "iforest",
            Detector::Pcad { .. } => "pcad",
            Detector::External { .. } => "external",
        }
    }

    /// Whether the detector has a neighborhood size of its own.
    pub fn uses_k(&self) -> bool {
        matches!(
            self,
            Detector::Knn { .. } | Detector::Lof | Detector::Odin | Detector::Nc | Detector::Mod { .. }
        )
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Detector::Mcd { .. } | Detector::Iforest { .. })
    }

    /// Smallest k the detector accepts.
    fn min_k(&self) -> usize {
        if matches!(self, Detector::Nc) {
            2
        } else {
            1
        }
    }

    /// Largest k the detector accepts on `n` points.
    fn max_k(&self, n: usize) -> usize {
        if matches!(self, Detector::Mod { .. }) {
            n
        } else {
            n.saturating_sub(1)
        }
    }

    /// Fewest points the detector can score on `d`-dimensional data.
    fn min_points(&self, d: usize) -> usize {
        match self {
            Detector::Nc => 3,
            Detector::Mod { .. } | Detector::External { .. } => 1,
            Detector::Mcd { .. } => d + 2,
            _ => 2,
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A detector together with its neighborhood size, seed and search backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub detector: Detector,
    /// Neighborhood size; ignored by detectors without one.
    pub k: usize,
    /// Seed for randomized detectors; ignored by the others.
    pub seed: u64,
    pub backend: Backend,
}

impl DetectorConfig {
    pub fn new(detector: Detector, k: usize, seed: u64) -> Self {
        DetectorConfig {
            detector,
            k,
            seed,
            backend: Backend::Auto,
        }
    }

    pub fn from_name(name: &str, k: usize, seed: u64) -> Result<Self> {
        Ok(Self::new(Detector::from_name(name)?, k, seed))
    }

    pub fn with_k(&self, k: usize) -> Self {
        DetectorConfig { k, ..self.clone() }
    }

    pub fn name(&self) -> &'static str {
        self.detector.name()
    }

    /// Scores `x`, rejecting parameters out of range.
    pub fn score(&self, x: ArrayView2<'_, f64>) -> Result<OutlierScores> {
        let k = self.k;
        let b = self.backend;
        match &self.detector {
            Detector::Knn { aggregate } => score_knn_with(x, k, *aggregate, b),
            Detector::Lof => score_lof_with(x, k, b),
            Detector::Odin => score_odin_with(x, k, b),
            Detector::Nc => score_nc_with(x, k, b),
            Detector::Mod { iterations } => score_mod_with(x, k, *iterations, b),
            Detector::Mcd { n_starts, max_csteps } => score_mcd(x, self.seed, *n_starts, *max_csteps),
            Detector::Iforest { n_trees, subsample } => score_iforest(x, self.seed, *n_trees, *subsample),
            Detector::Pcad { variance_floor } => score_pcad(x, *variance_floor),
            Detector::External { path } => external_scores(path, x.nrows()),
        }
    }

    /// Scores a possibly small point set such as a representative set:
    /// k is clamped into the range the detector allows on `x`, and sets
    /// too small for the detector get all-zero scores.
    pub fn score_adaptive(&self, x: ArrayView2<'_, f64>) -> Result<OutlierScores> {
        let (n, d) = x.dim();
        if n < self.detector.min_points(d) {
            return OutlierScores::new(vec![0.0; n]);
        }
        if self.detector.uses_k() {
            let k = self.k.clamp(self.detector.min_k(), self.detector.max_k(n));
            return self.with_k(k).score(x);
        }
        self.score(x)
    }

    /// Like [`score`](Self::score) for k-NN detectors that can work from
    /// precomputed self-excluding neighbor lists holding at least `k`
    /// entries. Other detectors ignore the table.
    pub(crate) fn score_with_table(&self, x: ArrayView2<'_, f64>, table: &[NeighborList]) -> Result<OutlierScores> {
        let k = self.k;
        match &self.detector {
            Detector::Knn { aggregate } => knn::knn_from_table(table, k, *aggregate),
            Detector::Lof => lof::lof_from_table(table, k),
            Detector::Odin => odin::odin_from_table(table, k),
            Detector::Nc => nc::nc_from_table(x, table, k),
            _ => self.score(x),
        }
    }
}
