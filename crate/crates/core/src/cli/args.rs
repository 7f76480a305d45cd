use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::detectors::{
    Detector, DetectorConfig, DETECTOR_NAMES, IFOREST_SUBSAMPLE, IFOREST_TREES, MCD_MAX_CSTEPS, MCD_STARTS,
    MOD_ITERATIONS, PCAD_VARIANCE_FLOOR,
};
use crate::error::{Error, Result};
use crate::eval::{DatasetSpec, LoadOptions, K_MAX, K_MIN};
use crate::neighbors::Backend;
use crate::nr::DEFAULT_ITERATIONS;

#[derive(Debug, Parser)]
#[command(name = "nrep", version, about = "Neighborhood-representative outlier scoring and benchmarking")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every row of a dataset.
    Score(ScoreArgs),
    /// Run the dataset × detector × {plain, nr} benchmark matrix.
    Bench(BenchArgs),
    /// Best-k sweep of one detector, one row per k.
    Sweep(SweepArgs),
    /// Best-k AUC for 0..=N medoid-shift iterations.
    Iterstudy(IterArgs),
    /// Median run time with and without NR.
    Timing(TimingArgs),
    /// Write a synthetic collective-outlier dataset.
    Synth(SynthArgs),
    /// AUC of a score file against a label file.
    Auc(AucArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_detector(s: &str) -> std::result::Result<String, String> {
    let name = s.to_ascii_lowercase();
    if name == "external" || Detector::from_name(&name).is_ok() {
        Ok(name)
    } else {
        Err(format!("unknown detector `{s}`; expected one of {}, knn-mean, external", DETECTOR_NAMES.join(", ")))
    }
}

/// Options applied before a file is loaded.
#[derive(Debug, Clone, Args, Serialize)]
pub struct LoadArgs {
    /// ARFF attribute holding the class.
    #[arg(long, default_value = "outlier")]
    pub label_attribute: String,
    /// ARFF class value marking an outlier.
    #[arg(long, default_value = "yes")]
    pub outlier_value: String,
    /// ARFF attributes to drop (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// CSV label column: header name, or 0-based index with --no-header.
    #[arg(long, default_value = "outlier")]
    pub label_column: String,
    /// Treat CSV input as unlabeled.
    #[arg(long)]
    pub no_labels: bool,
    /// CSV input has no header line.
    #[arg(long)]
    pub no_header: bool,
    /// Keep duplicate rows.
    #[arg(long)]
    pub no_dedupe: bool,
    /// Skip z-score normalization.
    #[arg(long)]
    pub no_normalize: bool,
}

impl LoadArgs {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            arff: crate::dataset::ArffOptions {
                label_attribute: self.label_attribute.clone(),
                outlier_value: self.outlier_value.clone(),
                exclude: self.exclude.clone(),
            },
            csv_has_header: !self.no_header,
            csv_label_column: (!self.no_labels).then(|| self.label_column.clone()),
        }
    }
}

/// Parameters shared by every detector choice.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectorParams {
    /// Seed for randomized detectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nearest-neighbor backend: auto, brute, kd or ball.
    #[arg(long, default_value_t = Backend::Auto)]
    pub backend: Backend,
    /// Mean-shift iterations of the mod detector.
    #[arg(long, default_value_t = MOD_ITERATIONS)]
    pub mod_iterations: usize,
    /// Random starts of FAST-MCD.
    #[arg(long, default_value_t = MCD_STARTS)]
    pub mcd_starts: usize,
    /// C-step limit per FAST-MCD start.
    #[arg(long, default_value_t = MCD_MAX_CSTEPS)]
    pub mcd_csteps: usize,
    /// Trees of the isolation forest.
    #[arg(long, default_value_t = IFOREST_TREES)]
    pub trees: usize,
    /// Subsample size of each isolation tree.
    #[arg(long, default_value_t = IFOREST_SUBSAMPLE)]
    pub subsample: usize,
    /// Eigenvalue floor of pcad.
    #[arg(long, default_value_t = PCAD_VARIANCE_FLOOR)]
    pub variance_floor: f64,
    /// Score file for the external detector, one score per row.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

impl DetectorParams {
    pub fn config(&self, name: &str, k: usize) -> Result<DetectorConfig> {
        let mut detector = if name == "external" {
            let path = self
                .scores
                .clone()
                .ok_or_else(|| Error::InvalidParameter("the external detector needs --scores".into()))?;
            Detector::External { path }
        } else {
            Detector::from_name(name)?
        };
        match &mut detector {
            Detector::Mod { iterations } => *iterations = self.mod_iterations,
            Detector::Mcd { n_starts, max_csteps } => {
                *n_starts = self.mcd_starts;
                *max_csteps = self.mcd_csteps;
            }
            Detector::Iforest { n_trees, subsample } => {
                *n_trees = self.trees;
                *subsample = self.subsample;
            }
            Detector::Pcad { variance_floor } => *variance_floor = self.variance_floor,
            _ => {}
        }
        Ok(DetectorConfig {
            backend: self.backend,
            ..DetectorConfig::new(detector, k, self.seed)
        })
    }
}

/// Output location and format.
#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    /// Dataset: .arff, .csv or synth:n_normal,n_outlier,separation,spread,seed.
    pub dataset: String,
    #[arg(long, value_parser = parse_detector)]
    pub detector: String,
    /// Neighborhood size of the detector and of NR.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Score neighborhood representatives and propagate.
    #[arg(long)]
    pub nr: bool,
    /// Medoid-shift iterations before scoring.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Also write the representative set to this CSV file.
    #[arg(long)]
    #[serde(skip)]
    pub representatives: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: DetectorParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub load: LoadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    /// Key = value file supplying defaults for any flag.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Datasets: .arff, .csv or synth:n_normal,n_outlier,separation,spread,seed.
    #[arg(required = true)]
    pub datasets: Vec<String>,
    /// Detectors (comma separated).
    #[arg(long = "detector", value_delimiter = ',', value_parser = parse_detector,
          default_values_t = DETECTOR_NAMES.map(String::from))]
    pub detectors: Vec<String>,
    #[arg(long, default_value_t = K_MIN)]
    pub k_min: usize,
    #[arg(long, default_value_t = K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Seeds averaged for randomized detectors (1 = single run).
    #[arg(long, default_value_t = 1)]
    pub seed_runs: usize,
    /// Record wall-clock seconds per sweep point.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: DetectorParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub load: LoadArgs,
    /// Output prefix: `<out>.records.csv`, `<out>.summary.csv`,
    /// `<out>.improvements.csv`, `<out>.config`, `<out>.json`.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Output formats (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv])]
    pub format: Vec<Format>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    pub dataset: String,
    #[arg(long, value_parser = parse_detector)]
    pub detector: String,
    #[arg(long, default_value_t = K_MIN)]
    pub k_min: usize,
    #[arg(long, default_value_t = K_MAX)]
    pub k_max: usize,
    #[arg(long)]
    pub nr: bool,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Include per-k wall-clock seconds.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: DetectorParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub load: LoadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IterArgs {
    pub dataset: String,
    #[arg(long, value_parser = parse_detector)]
    pub detector: String,
    #[arg(long, default_value_t = K_MIN)]
    pub k_min: usize,
    #[arg(long, default_value_t = K_MAX)]
    pub k_max: usize,
    /// Largest iteration count studied.
    #[arg(long, default_value_t = 10)]
    pub max_iterations: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: DetectorParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub load: LoadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TimingArgs {
    pub dataset: String,
    #[arg(long = "detector", value_delimiter = ',', value_parser = parse_detector,
          default_values_t = DETECTOR_NAMES.map(String::from))]
    pub detectors: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: DetectorParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub load: LoadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub n_normal: usize,
    #[arg(long, default_value_t = 30)]
    pub n_outlier: usize,
    #[arg(long, default_value_t = 8.0)]
    pub separation: f64,
    /// Outlier standard deviation relative to the normal class.
    #[arg(long, default_value_t = 0.15)]
    pub spread: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AucArgs {
    /// Score file, one score per line.
    #[arg(long)]
    pub scores: PathBuf,
    /// Label file, one 0/1 per line.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub(crate) fn dataset_spec(s: &str) -> Result<DatasetSpec> {
    s.parse()
}
