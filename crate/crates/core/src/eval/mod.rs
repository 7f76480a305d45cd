//! AUC, the best-k sweep, the iteration study, timing and the benchmark
//! matrix.

mod auc;
pub mod bench;
pub mod report;
mod sweep;
mod timing;

pub use auc::roc_auc;
pub use bench::{
    run_benchmark, BenchmarkConfig, BenchmarkRecord, BenchmarkResult, DatasetInfo, DatasetSpec, Failure,
    Improvement, LoadOptions, SummaryRow,
};
pub use sweep::{
    iteration_study, resolve_k_range, sweep_k, IterationRow, IterationStudy, Mode, SweepPoint, SweepResult, K_MAX,
    K_MIN,
};
pub use timing::{extra_percent, timing_report, TimingRow, MIN_REPETITIONS};
