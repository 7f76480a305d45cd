//! The `nrep` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod args;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

pub use args::{
    AucArgs, BenchArgs, Cli, Command, DetectorParams, Format, IterArgs, LoadArgs, OutputArgs, ScoreArgs, SweepArgs,
    SynthArgs, TimingArgs,
};
pub use config::{merge_config, parse_config, render_config, Entry};

use crate::dataset::{dedupe_with_map, write_csv, zscore_normalize, LabeledDataset};
use crate::detectors::parse_scores;
use crate::error::Error;
use crate::eval::{self, report, BenchmarkConfig, Mode};
use crate::nr::{NeighborhoodRepresentative, RepresentativeAssignment};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => CliError::Usage(m),
            e @ Error::KOutOfRange { .. } => CliError::Usage(e.to_string()),
            e => CliError::Data(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to stderr as a single line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("nrep: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version also arrive here
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nrep: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Score(a) => cmd_score(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Iterstudy(a) => cmd_iterstudy(&a),
        Command::Timing(a) => cmd_timing(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Auc(a) => cmd_auc(&a),
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    }
    tmp.persist(path)
        .map_err(|e| CliError::Internal(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Writes to `path`, or stdout when there is none.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, body),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush().map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// For CSV output to a file, the resolved configuration lands in
/// `<out>.config`.
fn write_config_sidecar<T: Serialize>(out: Option<&Path>, format: Format, command: &str, args: &T) -> CliResult<()> {
    match (out, format) {
        (Some(p), Format::Csv) => write_atomic(&sidecar(p, ".config"), |w| {
            w.write_all(render_config(command, args).as_bytes()).map_err(io_err)
        }),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct Document<'a, A: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a A,
    result: R,
}

fn json_document<A: Serialize, R: Serialize>(command: &str, args: &A, result: R, w: &mut dyn Write) -> CliResult<()> {
    report::write_json(
        &Document {
            command,
            config: args,
            result,
        },
        w,
    )
    .map_err(|e| CliError::Internal(e.to_string()))
}

fn internal(e: Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn load(dataset: &str, load: &LoadArgs) -> CliResult<LabeledDataset> {
    let spec = args::dataset_spec(dataset)?;
    Ok(spec.load(&load.load_options())?)
}

fn load_preprocessed(dataset: &str, l: &LoadArgs) -> CliResult<LabeledDataset> {
    Ok(crate::dataset::preprocess(&load(dataset, l)?, !l.no_dedupe, !l.no_normalize))
}

fn require_labels(ds: &LabeledDataset) -> CliResult<()> {
    if ds.labels().is_none() {
        return Err(CliError::Data(Error::InvalidData("this command needs labeled data".into())));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScoreOutput<'a> {
    scores: &'a [f64],
    /// For every row repeating an earlier row, that row's index.
    duplicate_of: &'a [Option<usize>],
    n_scored: usize,
    n_representatives: Option<usize>,
}

/// One score per input row in input order. Duplicate rows share the
/// score of their first occurrence.
pub fn cmd_score(a: &ScoreArgs) -> CliResult<()> {
    let raw = load(&a.dataset, &a.load)?;
    let (ds, map) = if a.load.no_dedupe {
        (raw.clone(), (0..raw.n_points()).collect())
    } else {
        dedupe_with_map(&raw)
    };
    let ds = if a.load.no_normalize { ds } else { zscore_normalize(&ds) };

    let mut first_of = vec![usize::MAX; ds.n_points()];
    let duplicate_of: Vec<Option<usize>> = map
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            if first_of[j] == usize::MAX {
                first_of[j] = i;
                None
            } else {
                Some(first_of[j])
            }
        })
        .collect();

    let cfg = a.params.config(&a.detector, a.k)?;
    let mut reps: Option<RepresentativeAssignment> = None;
    let scores = if a.nr {
        let assignment = NeighborhoodRepresentative::new(a.k)
            .iterations(a.iterations)
            .backend(cfg.backend)
            .select(ds.data())?;
        let rep_scores = cfg.score_adaptive(assignment.representatives.view())?;
        let s = assignment.propagate(&rep_scores)?;
        reps = Some(assignment);
        s
    } else {
        cfg.score(ds.data())?
    };
    let per_row: Vec<f64> = map.iter().map(|&j| scores[j]).collect();

    if let (Some(path), Some(r)) = (&a.representatives, &reps) {
        let rep_ds = LabeledDataset::with_names(r.representatives.clone(), None, ds.names().map(<[String]>::to_vec))
            .map_err(internal)?;
        write_atomic(path, |w| write_csv(&rep_ds, w).map_err(io_err))?;
    } else if a.representatives.is_some() {
        return Err(CliError::Usage("--representatives needs --nr".into()));
    }

    let out = a.output.out.as_deref();
    emit(out, |w| match a.output.format {
        Format::Csv => w.write_all(crate::detectors::format_scores(&per_row).as_bytes()).map_err(io_err),
        Format::Json => json_document(
            "score",
            a,
            ScoreOutput {
                scores: &per_row,
                duplicate_of: &duplicate_of,
                n_scored: ds.n_points(),
                n_representatives: reps.as_ref().map(RepresentativeAssignment::n_representatives),
            },
            w,
        ),
    })?;
    write_config_sidecar(out, a.output.format, "score", a)
}

fn bench_config(a: &BenchArgs) -> CliResult<BenchmarkConfig> {
    Ok(BenchmarkConfig {
        datasets: a
            .datasets
            .iter()
            .map(|d| args::dataset_spec(d))
            .collect::<Result<_, _>>()?,
        detectors: a
            .detectors
            .iter()
            .map(|d| a.params.config(d, 0))
            .collect::<Result<_, _>>()?,
        k_min: a.k_min,
        k_max: a.k_max,
        iterations: a.iterations,
        backend: a.params.backend,
        dedupe: !a.load.no_dedupe,
        normalize: !a.load.no_normalize,
        load: a.load.load_options(),
        seed_runs: a.seed_runs,
        timing: a.timing,
    })
}

/// Runs the benchmark matrix. Outputs are written even when some cells
/// fail; the exit code is then 2.
pub fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let result = eval::run_benchmark(&bench_config(a)?)?;
    let out = &a.out;
    let mut formats = a.format.clone();
    formats.dedup();
    for format in formats {
        match format {
            Format::Csv => {
                write_atomic(&sidecar(out, ".records.csv"), |w| {
                    report::write_records_csv(&result, w).map_err(internal)
                })?;
                write_atomic(&sidecar(out, ".summary.csv"), |w| {
                    report::write_summary_csv(&result, w).map_err(internal)
                })?;
                write_atomic(&sidecar(out, ".improvements.csv"), |w| {
                    report::write_improvements_csv(&result, w).map_err(internal)
                })?;
                write_atomic(&sidecar(out, ".config"), |w| {
                    w.write_all(render_config("bench", a).as_bytes()).map_err(io_err)
                })?;
            }
            Format::Json => write_atomic(&sidecar(out, ".json"), |w| json_document("bench", a, &result, w))?,
        }
    }
    for imp in &result.improvements {
        println!(
            "{}\t{}\tplain {:.4}\tnr {:.4}\t{:+.4}",
            imp.dataset, imp.detector, imp.plain_auc, imp.nr_auc, imp.improvement
        );
    }
    if result.failures.is_empty() {
        Ok(())
    } else {
        for f in &result.failures {
            eprintln!(
                "nrep: {}{}: {}",
                f.dataset,
                f.detector.as_deref().map(|d| format!(" / {d}")).unwrap_or_default(),
                f.message
            );
        }
        Err(CliError::Data(Error::InvalidData(format!(
            "{} benchmark entries failed",
            result.failures.len()
        ))))
    }
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    let ds = load_preprocessed(&a.dataset, &a.load)?;
    require_labels(&ds)?;
    let cfg = a.params.config(&a.detector, a.k_min)?;
    let mode = if a.nr { Mode::Nr } else { Mode::Plain };
    let result = eval::sweep_k(&ds, &cfg, a.k_min..=a.k_max, mode, a.iterations)?;
    let out = a.output.out.as_deref();
    emit(out, |w| match a.output.format {
        Format::Csv => report::write_sweep_csv(&result, a.timing, w).map_err(internal),
        Format::Json => json_document("sweep", a, &result, w),
    })?;
    write_config_sidecar(out, a.output.format, "sweep", a)
}

pub fn cmd_iterstudy(a: &IterArgs) -> CliResult<()> {
    let ds = load_preprocessed(&a.dataset, &a.load)?;
    require_labels(&ds)?;
    let cfg = a.params.config(&a.detector, a.k_min)?;
    let study = eval::iteration_study(&ds, &cfg, a.max_iterations, a.k_min..=a.k_max)?;
    let out = a.output.out.as_deref();
    emit(out, |w| match a.output.format {
        Format::Csv => report::write_iteration_csv(&study, w).map_err(internal),
        Format::Json => json_document("iterstudy", a, &study, w),
    })?;
    if let (Some(p), Format::Csv) = (out, a.output.format) {
        write_atomic(&sidecar(p, ".curve.csv"), |w| {
            report::write_iteration_curve_csv(&study, w).map_err(internal)
        })?;
    }
    write_config_sidecar(out, a.output.format, "iterstudy", a)
}

pub fn cmd_timing(a: &TimingArgs) -> CliResult<()> {
    let ds = load_preprocessed(&a.dataset, &a.load)?;
    let detectors = a
        .detectors
        .iter()
        .map(|d| a.params.config(d, a.k))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = eval::timing_report(&ds, &detectors, a.k, a.repetitions)?;
    let out = a.output.out.as_deref();
    emit(out, |w| match a.output.format {
        Format::Csv => report::write_timing_csv(&rows, w).map_err(internal),
        Format::Json => json_document("timing", a, &rows, w),
    })?;
    write_config_sidecar(out, a.output.format, "timing", a)
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let ds = crate::dataset::synth_collective(a.n_normal, a.n_outlier, a.separation, a.spread, a.seed)?;
    emit(a.out.as_deref(), |w| write_csv(&ds, w).map_err(io_err))
}

fn read_labels(path: &Path) -> CliResult<Vec<u8>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(Error::io(path, e)))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| match l {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(CliError::Data(Error::Parse {
                row: i + 1,
                column: "label".into(),
                message: format!("`{other}` is not 0 or 1"),
            })),
        })
        .collect()
}

/// Prints the AUC of a score file against a label file.
pub fn cmd_auc(a: &AucArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.scores).map_err(|e| CliError::Data(Error::io(&a.scores, e)))?;
    let scores = parse_scores(&text, None)?;
    let labels = read_labels(&a.labels)?;
    let auc = eval::roc_auc(&scores, &labels)?;
    println!("{auc:?}");
    Ok(())
}
