//! Best-k protocol: every k in a range is scored and the highest AUC wins,
//! ties going to the smaller k.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc_auc;
use crate::dataset::LabeledDataset;
use crate::detectors::{DetectorConfig, OutlierScores};
use crate::error::{Error, Result};
use crate::neighbors::{knn_all, Backend, NeighborList};
use crate::nr::{
    medoid_shift, medoid_shift_seeded, representatives_from_shift, NeighborhoodRepresentative,
    RepresentativeAssignment, ShiftResult,
};

/// Default sweep bounds.
pub const K_MIN: usize = 2;
pub const K_MAX: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plain,
    Nr,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Nr => "nr",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "nr" => Ok(Mode::Nr),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub auc: f64,
    /// Scoring time at this k, excluding work shared across the sweep.
    pub seconds: f64,
    /// Representative count in NR mode.
    pub representatives: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub detector: String,
    pub mode: Mode,
    pub iterations: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Whether the requested upper bound exceeded `n - 1`.
    pub truncated: bool,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Highest AUC, smallest k on ties.
    pub fn best(&self) -> &SweepPoint {
        best_point(&self.points)
    }
}

pub(crate) fn best_point(points: &[SweepPoint]) -> &SweepPoint {
    points
        .iter()
        .reduce(|best, p| if p.auc > best.auc || (p.auc == best.auc && p.k < best.k) { p } else { best })
        .expect("non-empty sweep")
}

/// Clamps a k range to what a dataset of `n` points supports.
pub fn resolve_k_range(range: &RangeInclusive<usize>, n: usize) -> Result<(usize, usize, bool)> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParameter(format!("invalid k range [{lo}, {hi}]")));
    }
    let cap = n.saturating_sub(1);
    let truncated = hi > cap;
    let hi = hi.min(cap);
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "k range starts at {lo} but the dataset only supports k <= {hi}"
        )));
    }
    if truncated {
        log::warn!("k range upper bound {} truncated to {hi} (n = {n})", range.end());
    }
    Ok((lo, hi, truncated))
}

/// Data, labels and self-excluding neighbor lists shared by all sweep
/// points over one dataset.
pub(crate) struct SweepContext<'a> {
    pub x: ArrayView2<'a, f64>,
    pub labels: &'a [u8],
    pub backend: Backend,
    pub table: Vec<NeighborList>,
    pub k_min: usize,
    pub k_max: usize,
    pub truncated: bool,
}

impl<'a> SweepContext<'a> {
    pub fn new(ds: &'a LabeledDataset, range: &RangeInclusive<usize>, backend: Backend) -> Result<Self> {
        let labels = ds
            .labels()
            .ok_or_else(|| Error::InvalidData("evaluation needs labels".into()))?;
        let (k_min, k_max, truncated) = resolve_k_range(range, ds.n_points())?;
        let table = knn_all(ds.data(), k_max, false, backend)?;
        Ok(SweepContext {
            x: ds.data(),
            labels,
            backend,
            table,
            k_min,
            k_max,
            truncated,
        })
    }

    pub fn ks(&self) -> RangeInclusive<usize> {
        self.k_min..=self.k_max
    }

    fn table_k(&self, k: usize) -> Vec<NeighborList> {
        self.table.iter().map(|l| l.truncated(k)).collect()
    }

    /// Plain detector scores at `k`: k-NN detectors use the shared lists.
    pub fn plain_scores(&self, cfg: &DetectorConfig, k: usize) -> Result<OutlierScores> {
        let cfg = DetectorConfig {
            backend: self.backend,
            ..cfg.with_k(k)
        };
        if cfg.detector.uses_k() {
            cfg.score_with_table(self.x, &self.table_k(k))
        } else {
            cfg.score(self.x)
        }
    }

    pub fn representatives(&self, k: usize, iterations: usize) -> Result<RepresentativeAssignment> {
        NeighborhoodRepresentative::new(k)
            .iterations(iterations)
            .backend(self.backend)
            .select_seeded(self.x, Some(&self.table))
    }

    /// Scores the representatives with `cfg` (detector k tied to NR k for
    /// k-NN detectors) and spreads the scores to all points.
    pub fn nr_scores(&self, cfg: &DetectorConfig, k: usize, reps: &RepresentativeAssignment) -> Result<OutlierScores> {
        let cfg = DetectorConfig {
            backend: self.backend,
            ..if cfg.detector.uses_k() { cfg.with_k(k) } else { cfg.clone() }
        };
        let rep_scores = cfg.score_adaptive(reps.representatives.view())?;
        reps.propagate(&rep_scores)
    }

    pub fn auc(&self, scores: &[f64]) -> Result<f64> {
        roc_auc(scores, self.labels)
    }
}

pub(crate) fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Plain sweep of one detector over a prepared context.
pub(crate) fn plain_sweep(ctx: &SweepContext<'_>, cfg: &DetectorConfig) -> Result<Vec<SweepPoint>> {
    if !cfg.detector.uses_k() {
        // the detector never sees k: score once, report the same AUC everywhere
        let (scores, seconds) = timed(|| ctx.plain_scores(cfg, ctx.k_min))?;
        let auc = ctx.auc(&scores)?;
        return Ok(ctx
            .ks()
            .map(|k| SweepPoint {
                k,
                auc,
                seconds,
                representatives: None,
            })
            .collect());
    }
    ctx.ks()
        .into_par_iter()
        .map(|k| {
            let (scores, seconds) = timed(|| ctx.plain_scores(cfg, k))?;
            Ok(SweepPoint {
                k,
                auc: ctx.auc(&scores)?,
                seconds,
                representatives: None,
            })
        })
        .collect()
}

pub(crate) fn nr_point(
    ctx: &SweepContext<'_>,
    cfg: &DetectorConfig,
    k: usize,
    reps: &RepresentativeAssignment,
) -> Result<SweepPoint> {
    let (scores, seconds) = timed(|| ctx.nr_scores(cfg, k, reps))?;
    Ok(SweepPoint {
        k,
        auc: ctx.auc(&scores)?,
        seconds,
        representatives: Some(reps.n_representatives()),
    })
}

/// Runs the best-k protocol for one detector.
///
/// In NR mode the detector's own k follows the NR k; detectors without a
/// k keep their parameters and only the representative set changes.
pub fn sweep_k(
    ds: &LabeledDataset,
    detector: &DetectorConfig,
    k_range: RangeInclusive<usize>,
    mode: Mode,
    nr_iterations: usize,
) -> Result<SweepResult> {
    let ctx = SweepContext::new(ds, &k_range, detector.backend)?;
    let points = match mode {
        Mode::Plain => plain_sweep(&ctx, detector)?,
        Mode::Nr => ctx
            .ks()
            .into_par_iter()
            .map(|k| {
                let reps = ctx.representatives(k, nr_iterations)?;
                nr_point(&ctx, detector, k, &reps)
            })
            .collect::<Result<_>>()?,
    };
    Ok(SweepResult {
        detector: detector.name().to_owned(),
        mode,
        iterations: if mode == Mode::Nr { nr_iterations } else { 0 },
        k_min: ctx.k_min,
        k_max: ctx.k_max,
        truncated: ctx.truncated,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub iterations: usize,
    pub best_k: usize,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStudy {
    pub detector: String,
    pub k_min: usize,
    pub k_max: usize,
    pub rows: Vec<IterationRow>,
    /// Every evaluated `(iterations, k, auc)` triple.
    pub curve: Vec<(usize, usize, f64)>,
}

/// Best-k AUC for every iteration count in `0..=max_iterations`; 0 is the
/// plain detector.
pub fn iteration_study(
    ds: &LabeledDataset,
    detector: &DetectorConfig,
    max_iterations: usize,
    k_range: RangeInclusive<usize>,
) -> Result<IterationStudy> {
    let ctx = SweepContext::new(ds, &k_range, detector.backend)?;
    iteration_study_in(&ctx, detector, max_iterations)
}

pub(crate) fn iteration_study_in(
    ctx: &SweepContext<'_>,
    detector: &DetectorConfig,
    max_iterations: usize,
) -> Result<IterationStudy> {
    let plain = plain_sweep(ctx, detector)?;
    let mut curve: Vec<(usize, usize, f64)> = plain.iter().map(|p| (0, p.k, p.auc)).collect();

    // per k, walk the shift one iteration at a time
    let per_k: Vec<Vec<SweepPoint>> = ctx
        .ks()
        .into_par_iter()
        .map(|k| {
            let mut points = Vec::with_capacity(max_iterations);
            if max_iterations == 0 {
                return Ok(points);
            }
            let mut shift = medoid_shift_seeded(ctx.x, k, 1, ctx.backend, Some(&ctx.table))?;
            points.push(nr_point(ctx, detector, k, &representatives_from_shift(&shift))?);
            for it in 2..=max_iterations {
                let next = medoid_shift(shift.shifted.view(), k, 1, ctx.backend)?;
                let prev = shift.origin.as_ref().expect("medoid shift");
                let origin = next.origin.as_ref().expect("medoid shift").iter().map(|&m| prev[m]).collect();
                shift = ShiftResult {
                    shifted: next.shifted,
                    origin: Some(origin),
                    iterations: it,
                };
                points.push(nr_point(ctx, detector, k, &representatives_from_shift(&shift))?);
            }
            Ok(points)
        })
        .collect::<Result<_>>()?;

    let mut rows = vec![IterationRow {
        iterations: 0,
        best_k: best_point(&plain).k,
        auc: best_point(&plain).auc,
    }];
    for it in 1..=max_iterations {
        let points: Vec<SweepPoint> = per_k.iter().map(|ps| ps[it - 1].clone()).collect();
        curve.extend(points.iter().map(|p| (it, p.k, p.auc)));
        let best = best_point(&points);
        rows.push(IterationRow {
            iterations: it,
            best_k: best.k,
            auc: best.auc,
        });
    }
    Ok(IterationStudy {
        detector: detector.name().to_owned(),
        k_min: ctx.k_min,
        k_max: ctx.k_max,
        rows,
        curve,
    })
}
