use serde::Serialize;

use super::roc_auc;
use super::sweep::timed;
use crate::dataset::LabeledDataset;
use crate::detectors::{DetectorConfig, OutlierScores};
use crate::error::{Error, Result};
use crate::nr::NeighborhoodRepresentative;

/// Minimum repetitions behind each median.
pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub detector: String,
    pub plain_seconds: f64,
    /// Full NR pipeline: medoid shift, dedupe, scoring, propagation.
    pub nr_seconds: f64,
    pub extra_percent: f64,
    /// `nr - plain` AUC at the same k; `None` for unlabeled data.
    pub auc_delta: Option<f64>,
}

/// `(nr - plain) / plain * 100`.
pub fn extra_percent(plain_seconds: f64, nr_seconds: f64) -> f64 {
    if plain_seconds > 0.0 {
        (nr_seconds - plain_seconds) / plain_seconds * 100.0
    } else {
        0.0
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Median wall-clock cost of each detector with and without NR at a
/// single k. `repetitions` below [`MIN_REPETITIONS`] is raised to it.
pub fn timing_report(
    ds: &LabeledDataset,
    detectors: &[DetectorConfig],
    k: usize,
    repetitions: usize,
) -> Result<Vec<TimingRow>> {
    if detectors.is_empty() {
        return Err(Error::InvalidParameter("no detectors to time".into()));
    }
    let reps = repetitions.max(MIN_REPETITIONS);
    let x = ds.data();
    detectors
        .iter()
        .map(|cfg| {
            let cfg = if cfg.detector.uses_k() { cfg.with_k(k) } else { cfg.clone() };
            let nr = NeighborhoodRepresentative::new(k).backend(cfg.backend);
            let mut plain_times = Vec::with_capacity(reps);
            let mut nr_times = Vec::with_capacity(reps);
            let mut plain_scores = OutlierScores::default();
            let mut nr_scores = OutlierScores::default();
            for _ in 0..reps {
                let (s, t) = timed(|| cfg.score(x))?;
                plain_scores = s;
                plain_times.push(t);
                let (s, t) = timed(|| nr.score(x, |r| cfg.score_adaptive(r)))?;
                nr_scores = s;
                nr_times.push(t);
            }
            let auc_delta = match ds.labels() {
                Some(labels) => Some(roc_auc(&nr_scores, labels)? - roc_auc(&plain_scores, labels)?),
                None => None,
            };
            let (plain_seconds, nr_seconds) = (median(plain_times), median(nr_times));
            Ok(TimingRow {
                detector: cfg.name().to_owned(),
                plain_seconds,
                nr_seconds,
                extra_percent: extra_percent(plain_seconds, nr_seconds),
                auc_delta,
            })
        })
        .collect()
}
