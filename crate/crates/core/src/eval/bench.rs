//! The dataset × detector × {plain, nr} benchmark matrix.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::sweep::{best_point, nr_point, plain_sweep, SweepContext, SweepPoint, K_MAX, K_MIN};
use crate::dataset::{load_arff, load_csv, preprocess, synth_collective, ArffOptions, LabeledDataset};
use crate::detectors::DetectorConfig;
use crate::error::{Error, Result};
use crate::neighbors::Backend;
use crate::nr::DEFAULT_ITERATIONS;

pub use super::sweep::Mode;

/// Where a benchmark dataset comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// `.arff` or `.csv` file.
    File(PathBuf),
    /// `synth:n_normal,n_outlier,separation,spread_ratio,seed`.
    Synth {
        n_normal: usize,
        n_outlier: usize,
        separation: f64,
        spread_ratio: f64,
        seed: u64,
    },
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(args) = s.strip_prefix("synth:") else {
            return Ok(DatasetSpec::File(PathBuf::from(s)));
        };
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("expected synth:n_normal,n_outlier,separation,spread,seed, got `{s}`"));
        if parts.len() != 5 {
            return Err(bad());
        }
        Ok(DatasetSpec::Synth {
            n_normal: parts[0].parse().map_err(|_| bad())?,
            n_outlier: parts[1].parse().map_err(|_| bad())?,
            separation: parts[2].parse().map_err(|_| bad())?,
            spread_ratio: parts[3].parse().map_err(|_| bad())?,
            seed: parts[4].parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::File(p) => write!(f, "{}", p.display()),
            DatasetSpec::Synth {
                n_normal,
                n_outlier,
                separation,
                spread_ratio,
                seed,
            } => write!(f, "synth:{n_normal},{n_outlier},{separation},{spread_ratio},{seed}"),
        }
    }
}

impl Serialize for DatasetSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// How tabular inputs are read.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadOptions {
    pub arff: ArffOptions,
    pub csv_has_header: bool,
    /// Label column of CSV inputs: a header name, or a 0-based index
    /// without a header.
    pub csv_label_column: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            arff: ArffOptions::default(),
            csv_has_header: true,
            csv_label_column: Some("outlier".into()),
        }
    }
}

impl DatasetSpec {
    /// Reads or generates the raw (unprocessed) dataset.
    pub fn load(&self, opts: &LoadOptions) -> Result<LabeledDataset> {
        match self {
            DatasetSpec::Synth {
                n_normal,
                n_outlier,
                separation,
                spread_ratio,
                seed,
            } => synth_collective(*n_normal, *n_outlier, *separation, *spread_ratio, *seed),
            DatasetSpec::File(path) => {
                let ext = path
                    .extension()
                    .and_then(|e| e.to_str())
                    .map(str::to_ascii_lowercase);
                match ext.as_deref() {
                    Some("arff") => load_arff(path, &opts.arff),
                    _ => load_csv(path, opts.csv_has_header, opts.csv_label_column.as_deref()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkConfig {
    pub datasets: Vec<DatasetSpec>,
    pub detectors: Vec<DetectorConfig>,
    pub k_min: usize,
    pub k_max: usize,
    pub iterations: usize,
    pub backend: Backend,
    pub dedupe: bool,
    pub normalize: bool,
    pub load: LoadOptions,
    /// Seeds averaged for randomized detectors in addition to the main
    /// run; `1` disables the extra runs.
    pub seed_runs: usize,
    /// Record wall-clock seconds; off by default so outputs are
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            datasets: Vec::new(),
            detectors: Vec::new(),
            k_min: K_MIN,
            k_max: K_MAX,
            iterations: DEFAULT_ITERATIONS,
            backend: Backend::Auto,
            dedupe: true,
            normalize: true,
            load: LoadOptions::default(),
            seed_runs: 1,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub dataset: String,
    pub detector: String,
    pub mode: Mode,
    pub k: usize,
    pub iterations: usize,
    pub auc: f64,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub detector: String,
    pub mode: Mode,
    /// Smallest k reaching the best AUC.
    pub best_k: usize,
    pub auc: f64,
    /// Mean best-k AUC over `seed_runs` seeds for randomized detectors.
    pub seed_mean_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub dataset: String,
    pub detector: String,
    pub plain_auc: f64,
    pub nr_auc: f64,
    pub improvement: f64,
}

/// A dataset or cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub dataset: String,
    pub detector: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub dataset: String,
    pub n_points: usize,
    pub n_features: usize,
    pub n_outliers: usize,
    pub k_max: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub config: BenchmarkConfig,
    pub datasets: Vec<DatasetInfo>,
    pub records: Vec<BenchmarkRecord>,
    pub summary: Vec<SummaryRow>,
    pub improvements: Vec<Improvement>,
    pub failures: Vec<Failure>,
}

impl BenchmarkResult {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_for(&self, dataset: &str, detector: &str, mode: Mode) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.dataset == dataset && r.detector == detector && r.mode == mode)
    }
}

struct Cell {
    detector: String,
    plain: Vec<SweepPoint>,
    nr: Vec<SweepPoint>,
    seed_means: Option<(f64, f64)>,
}

/// Runs the full matrix. Datasets that fail to load and cells that fail
/// to score are listed in `failures`; the rest of the matrix still runs.
/// Records are ordered by dataset and detector in config order, then
/// mode and k.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkResult> {
    if config.datasets.is_empty() || config.detectors.is_empty() {
        return Err(Error::InvalidParameter("benchmark needs at least one dataset and one detector".into()));
    }
    if config.seed_runs == 0 {
        return Err(Error::InvalidParameter("seed_runs must be at least 1".into()));
    }
    let mut result = BenchmarkResult {
        config: config.clone(),
        datasets: Vec::new(),
        records: Vec::new(),
        summary: Vec::new(),
        improvements: Vec::new(),
        failures: Vec::new(),
    };
    for spec in &config.datasets {
        let id = spec.to_string();
        let fail = |message: String, detector: Option<String>| Failure {
            dataset: id.clone(),
            detector,
            message,
        };
        let ds = match spec.load(&config.load) {
            Ok(raw) => preprocess(&raw, config.dedupe, config.normalize),
            Err(e) => {
                log::error!("{id}: {e}");
                result.failures.push(fail(e.to_string(), None));
                continue;
            }
        };
        let ctx = match SweepContext::new(&ds, &(config.k_min..=config.k_max), config.backend) {
            Ok(ctx) => ctx,
            Err(e) => {
                log::error!("{id}: {e}");
                result.failures.push(fail(e.to_string(), None));
                continue;
            }
        };
        log::info!("{id}: {} points, {} features", ds.n_points(), ds.n_features());
        result.datasets.push(DatasetInfo {
            dataset: id.clone(),
            n_points: ds.n_points(),
            n_features: ds.n_features(),
            n_outliers: ds.n_outliers(),
            k_max: ctx.k_max,
            truncated: ctx.truncated,
        });

        for (det, cell) in config.detectors.iter().zip(run_cells(&ctx, config)) {
            match cell {
                Ok(cell) => push_cell(&mut result, &id, cell, config),
                Err(e) => {
                    log::error!("{id} / {}: {e}", det.name());
                    result.failures.push(fail(e.to_string(), Some(det.name().to_owned())));
                }
            }
        }
    }
    Ok(result)
}

fn with_backend(det: &DetectorConfig, backend: Backend) -> DetectorConfig {
    DetectorConfig {
        backend,
        ..det.clone()
    }
}

/// Evaluates every detector on one dataset. Representatives are
/// computed once per k and shared by all detectors.
fn run_cells(ctx: &SweepContext<'_>, config: &BenchmarkConfig) -> Vec<Result<Cell>> {
    let detectors: Vec<DetectorConfig> = config
        .detectors
        .iter()
        .map(|d| with_backend(d, config.backend))
        .collect();

    let plain: Vec<Result<Vec<SweepPoint>>> = detectors.par_iter().map(|d| plain_sweep(ctx, d)).collect();

    // nr_by_k[k][detector]
    let nr_by_k: Vec<Vec<Result<SweepPoint>>> = ctx
        .ks()
        .into_par_iter()
        .map(|k| match ctx.representatives(k, config.iterations) {
            Ok(reps) => detectors.iter().map(|d| nr_point(ctx, d, k, &reps)).collect(),
            Err(e) => detectors.iter().map(|_| Err(clone_error(&e))).collect(),
        })
        .collect();
    let mut nr: Vec<Result<Vec<SweepPoint>>> = detectors.iter().map(|_| Ok(Vec::new())).collect();
    for row in nr_by_k {
        for (slot, point) in nr.iter_mut().zip(row) {
            if let Ok(points) = slot {
                match point {
                    Ok(p) => points.push(p),
                    Err(e) => *slot = Err(e),
                }
            }
        }
    }

    detectors
        .iter()
        .zip(plain.into_iter().zip(nr))
        .map(|(det, (plain, nr))| {
            let (plain, nr) = (plain?, nr?);
            let seed_means = if config.seed_runs > 1 && det.detector.is_randomized() {
                Some(seed_means(ctx, det, config)?)
            } else {
                None
            };
            Ok(Cell {
                detector: det.name().to_owned(),
                plain,
                nr,
                seed_means,
            })
        })
        .collect()
}

/// Mean best-k AUC (plain, nr) over `seed_runs` consecutive seeds.
fn seed_means(ctx: &SweepContext<'_>, det: &DetectorConfig, config: &BenchmarkConfig) -> Result<(f64, f64)> {
    let runs: Vec<(f64, f64)> = (0..config.seed_runs as u64)
        .into_par_iter()
        .map(|offset| {
            let d = DetectorConfig {
                seed: det.seed.wrapping_add(offset),
                ..det.clone()
            };
            let plain = plain_sweep(ctx, &d)?;
            let nr = ctx
                .ks()
                .map(|k| nr_point(ctx, &d, k, &ctx.representatives(k, config.iterations)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((best_point(&plain).auc, best_point(&nr).auc))
        })
        .collect::<Result<_>>()?;
    let m = runs.len() as f64;
    Ok((
        runs.iter().map(|r| r.0).sum::<f64>() / m,
        runs.iter().map(|r| r.1).sum::<f64>() / m,
    ))
}

fn clone_error(e: &Error) -> Error {
    Error::InvalidData(e.to_string())
}

fn push_cell(result: &mut BenchmarkResult, dataset: &str, cell: Cell, config: &BenchmarkConfig) {
    let mut best = [(0usize, 0.0f64); 2];
    for (slot, (mode, points)) in [(Mode::Plain, &cell.plain), (Mode::Nr, &cell.nr)].into_iter().enumerate() {
        let iterations = if mode == Mode::Nr { config.iterations } else { 0 };
        result.records.extend(points.iter().map(|p| BenchmarkRecord {
            dataset: dataset.to_owned(),
            detector: cell.detector.clone(),
            mode,
            k: p.k,
            iterations,
            auc: p.auc,
            seconds: config.timing.then_some(p.seconds),
        }));
        let b = best_point(points);
        best[slot] = (b.k, b.auc);
        result.summary.push(SummaryRow {
            dataset: dataset.to_owned(),
            detector: cell.detector.clone(),
            mode,
            best_k: b.k,
            auc: b.auc,
            seed_mean_auc: cell.seed_means.map(|m| if slot == 0 { m.0 } else { m.1 }),
        });
    }
    result.improvements.push(Improvement {
        dataset: dataset.to_owned(),
        detector: cell.detector,
        plain_auc: best[0].1,
        nr_auc: best[1].1,
        improvement: best[1].1 - best[0].1,
    });
}
