//! Minimum covariance determinant via random starts refined by C-steps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::ArrayView2;
use rand::seq::index::sample;
use rayon::prelude::*;

use super::{unit_rng, OutlierScores};
use crate::error::{Error, Result};

pub const MCD_STARTS: usize = 50;
pub const MCD_MAX_CSTEPS: usize = 20;

/// Eigenvalue ratio below which a covariance counts as near-singular.
const SINGULAR_RATIO: f64 = 1e-12;
/// Ridge scale for near-singular covariances, relative to `trace / d`.
const RIDGE_SCALE: f64 = 1e-6;
/// Slack on the C-step determinant inequality, in log space.
const LOGDET_SLACK: f64 = 1e-9;

/// Log-determinants of one refinement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CStepRecord {
    /// Log-determinant of the raw covariance of the selected subset.
    pub raw_logdet: f64,
    /// Log-determinant of the covariance actually used for distances.
    pub used_logdet: f64,
    pub regularized: bool,
}

#[derive(Debug, Clone)]
pub struct McdFit {
    pub h: usize,
    pub location: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub logdet: f64,
    /// Sorted indices of the winning `h`-subset.
    pub subset: Vec<usize>,
    pub best_start: usize,
    /// One trace per random start; entry 0 is the first `h`-subset.
    pub traces: Vec<Vec<CStepRecord>>,
}

impl McdFit {
    /// Whether every C-step lowered (or kept) the determinant relative to
    /// the covariance that drove it.
    pub fn csteps_monotone(&self) -> bool {
        self.traces
            .iter()
            .all(|t| t.windows(2).all(|w| c_step_ok(&w[0], &w[1])))
    }

    pub fn n_csteps(&self) -> usize {
        self.traces.iter().map(|t| t.len().saturating_sub(1)).sum()
    }
}

fn c_step_ok(before: &CStepRecord, after: &CStepRecord) -> bool {
    after.raw_logdet <= before.used_logdet + LOGDET_SLACK * (1.0 + before.used_logdet.abs())
}

struct Estimate {
    location: DVector<f64>,
    covariance: DMatrix<f64>,
    cholesky: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    record: CStepRecord,
}

fn estimate(rows: &[DVector<f64>], subset: &[usize]) -> Estimate {
    let d = rows[0].len();
    let m = subset.len() as f64;
    let mut location = DVector::zeros(d);
    for &i in subset {
        location += &rows[i];
    }
    location /= m;
    let mut cov = DMatrix::zeros(d, d);
    for &i in subset {
        let c = &rows[i] - &location;
        cov.ger(1.0 / m, &c, &c, 1.0);
    }
    let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    let raw_logdet = eig.iter().map(|&l| if l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).sum::<f64>();
    let mut regularized = false;
    let mut used_logdet = raw_logdet;
    if !(min > SINGULAR_RATIO * max) {
        let trace = cov.trace();
        let eps = if trace > 0.0 { RIDGE_SCALE * trace / d as f64 } else { 1e-12 };
        for j in 0..d {
            cov[(j, j)] += eps;
        }
        regularized = true;
        used_logdet = eig.iter().map(|&l| (l.max(0.0) + eps).ln()).sum();
    }
    let cholesky = cov
        .clone()
        .cholesky()
        .expect("covariance is positive definite after regularization");
    Estimate {
        location,
        covariance: cov,
        cholesky,
        record: CStepRecord {
            raw_logdet,
            used_logdet,
            regularized,
        },
    }
}

fn sq_mahalanobis(est: &Estimate, row: &DVector<f64>) -> f64 {
    let c = row - &est.location;
    let y = est
        .cholesky
        .l_dirty()
        .solve_lower_triangular(&c)
        .expect("non-singular factor");
    y.norm_squared()
}

/// The `h` points closest under `est`, ties by index, returned sorted.
fn c_step(rows: &[DVector<f64>], est: &Estimate, h: usize) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (sq_mahalanobis(est, r), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut subset: Vec<usize> = order[..h].iter().map(|p| p.1).collect();
    subset.sort_unstable();
    subset
}

struct StartResult {
    subset: Vec<usize>,
    estimate: Estimate,
    trace: Vec<CStepRecord>,
}

fn run_start(rows: &[DVector<f64>], h: usize, seed: u64, start: usize, max_csteps: usize) -> StartResult {
    let n = rows.len();
    let d = rows[0].len();
    let mut rng = unit_rng(seed, start as u64);
    let mut init: Vec<usize> = sample(&mut rng, n, d + 1).into_vec();
    init.sort_unstable();
    let mut subset = c_step(rows, &estimate(rows, &init), h);
    let mut est = estimate(rows, &subset);
    let mut trace = vec![est.record];
    for _ in 0..max_csteps {
        let next = c_step(rows, &est, h);
        if next == subset {
            break;
        }
        let next_est = estimate(rows, &next);
        debug_assert!(c_step_ok(&est.record, &next_est.record), "C-step raised the determinant");
        trace.push(next_est.record);
        let improved = next_est.record.used_logdet < est.record.used_logdet;
        subset = next;
        est = next_est;
        if !improved {
            break;
        }
    }
    StartResult {
        subset,
        estimate: est,
        trace,
    }
}

/// Runs the subset search and returns the winning estimate together with
/// the determinant trace of every start.
pub fn fit_mcd(x: ArrayView2<'_, f64>, seed: u64, n_starts: usize, max_csteps: usize) -> Result<McdFit> {
    let (n, d) = x.dim();
    if n < d + 2 {
        return Err(Error::InvalidData(format!(
            "MCD needs at least d + 2 = {} points, got {n}",
            d + 2
        )));
    }
    if n_starts == 0 {
        return Err(Error::InvalidParameter("MCD needs at least one start".into()));
    }
    let h = (n + d + 1) / 2;
    let rows: Vec<DVector<f64>> = x
        .outer_iter()
        .map(|r| DVector::from_iterator(d, r.iter().copied()))
        .collect();
    let starts: Vec<StartResult> = (0..n_starts)
        .into_par_iter()
        .map(|s| run_start(&rows, h, seed, s, max_csteps))
        .collect();
    let best_start = (0..n_starts)
        .min_by(|&a, &b| {
            starts[a]
                .estimate
                .record
                .used_logdet
                .total_cmp(&starts[b].estimate.record.used_logdet)
                .then(a.cmp(&b))
        })
        .expect("at least one start");
    let traces = starts.iter().map(|s| s.trace.clone()).collect();
    let best = starts.into_iter().nth(best_start).unwrap();
    Ok(McdFit {
        h,
        location: best.estimate.location,
        covariance: best.estimate.covariance,
        logdet: best.estimate.record.used_logdet,
        subset: best.subset,
        best_start,
        traces,
    })
}

/// Mahalanobis distance of every point under the minimum-determinant
/// `h`-subset estimate, `h = ⌊(n + d + 1) / 2⌋`.
pub fn score_mcd(x: ArrayView2<'_, f64>, seed: u64, n_starts: usize, max_csteps: usize) -> Result<OutlierScores> {
    let fit = fit_mcd(x, seed, n_starts, max_csteps)?;
    mahalanobis_scores(x, &fit)
}

pub fn mahalanobis_scores(x: ArrayView2<'_, f64>, fit: &McdFit) -> Result<OutlierScores> {
    let d = x.ncols();
    let chol = fit
        .covariance
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidData("MCD covariance is not positive definite".into()))?;
    let scores = x
        .outer_iter()
        .map(|r| {
            let c = DVector::from_iterator(d, r.iter().copied()) - &fit.location;
            chol.l_dirty()
                .solve_lower_triangular(&c)
                .expect("non-singular factor")
                .norm()
        })
        .collect();
    OutlierScores::new(scores)
}
