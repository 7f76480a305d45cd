//! Acceptance checks, one PASS/FAIL/SKIP line each. Exits non-zero when
//! any check fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use nrep::dataset::{load_arff, preprocess, synth_collective, ArffOptions, LabeledDataset};
use nrep::detectors::{fit_mcd, Detector, DetectorConfig, DETECTOR_NAMES};
use nrep::eval::{iteration_study, roc_auc, sweep_k, Mode};
use nrep::neighbors::{Backend, NeighborIndex, NeighborList};
use nrep::nr::NeighborhoodRepresentative;

type Outcome = Result<String, String>;

enum Status {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn gaussian(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal))
}

fn all_detectors(k: usize, seed: u64) -> Vec<DetectorConfig> {
    DETECTOR_NAMES
        .iter()
        .map(|n| DetectorConfig::from_name(n, k, seed).unwrap())
        .collect()
}

fn best_auc(ds: &LabeledDataset, cfg: &DetectorConfig, lo: usize, hi: usize, mode: Mode) -> Result<(usize, f64), String> {
    let r = sweep_k(ds, cfg, lo..=hi, mode, 1).map_err(|e| e.to_string())?;
    Ok((r.best().k, r.best().auc))
}

// 1. NR with k = 1 leaves every detector's scores unchanged.
fn k1_identity() -> Outcome {
    let x = gaussian(200, 5, 101);
    let mut checked = 0;
    for cfg in all_detectors(10, 17) {
        let mut ks = vec![10];
        if !matches!(cfg.detector, Detector::Nc) {
            ks.push(1);
        }
        for k in ks {
            let cfg = cfg.with_k(k);
            let plain = cfg.score(x.view()).map_err(|e| e.to_string())?;
            let reps = NeighborhoodRepresentative::new(1).select(x.view()).map_err(|e| e.to_string())?;
            if reps.n_representatives() != 200 {
                return Err(format!("k=1 produced {} representatives", reps.n_representatives()));
            }
            let nr = NeighborhoodRepresentative::new(1)
                .score(x.view(), |r| cfg.score(r))
                .map_err(|e| e.to_string())?;
            let same = plain.iter().zip(nr.iter()).all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                return Err(format!("{} (detector k={k}): NR k=1 scores differ", cfg.name()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} detector configurations bit-identical"))
}

// 2. NR rescues LOF on a dense cluster of collective outliers.
fn collective_rescue() -> Outcome {
    let raw = synth_collective(200, 30, 8.0, 0.15, 7).map_err(|e| e.to_string())?;
    let ds = preprocess(&raw, true, true);
    let lof = DetectorConfig::from_name("lof", 0, 0).unwrap();
    let curves = [Mode::Plain, Mode::Nr].map(|m| sweep_k(&ds, &lof, 2..=60, m, 1));
    let [plain_curve, nr_curve] = match curves {
        [Ok(p), Ok(n)] => [p, n],
        [Err(e), _] | [_, Err(e)] => return Err(e.to_string()),
    };
    let (pk, plain) = (plain_curve.best().k, plain_curve.best().auc);
    let (nk, nr) = (nr_curve.best().k, nr_curve.best().auc);
    let first_ok = |r: &nrep::eval::SweepResult| {
        r.points.iter().find(|p| p.auc >= 0.95).map_or("none".to_string(), |p| p.k.to_string())
    };
    let detail = format!(
        "plain LOF {plain:.4} (k={pk}), NR+LOF {nr:.4} (k={nk}); first k with AUC >= 0.95: plain {}, NR {}",
        first_ok(&plain_curve),
        first_ok(&nr_curve)
    );
    if nr >= plain + 0.05 && nr >= 0.95 {
        Ok(detail)
    } else {
        Err(format!("{detail}; need NR >= plain + 0.05 and NR >= 0.95"))
    }
}

fn pair_count_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li == 1 && lj == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

// 3. Rank AUC equals the pair-counting definition exactly.
fn auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut with_ties = 0;
    for trial in 0..100 {
        let n = 50;
        let scores: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.random_range(0..8) as f64).collect()
        } else {
            (0..n).map(|_| rng.random::<f64>()).collect()
        };
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
        labels[0] = 0;
        labels[1] = 1;
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            with_ties += 1;
        }
        let got = roc_auc(&scores, &labels).map_err(|e| e.to_string())?;
        let want = pair_count_auc(&scores, &labels);
        if got != want {
            return Err(format!("trial {trial}: rank AUC {got} != pair count {want}"));
        }
    }
    Ok(format!("100 vectors equal, {with_ties} with ties"))
}

/// Sorted by (squared distance, index), the query itself first when
/// it is included.
fn oracle_neighbors(x: &Array2<f64>, q: usize, k: usize, include_self: bool) -> Vec<(usize, f64)> {
    let mut all: Vec<(f64, usize, usize)> = (0..x.nrows())
        .filter(|&j| include_self || j != q)
        .map(|j| {
            let d2: f64 = x.row(q).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, usize::from(j != q), j)
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    all.truncate(k);
    all.into_iter().map(|(d2, _, j)| (j, d2.sqrt())).collect()
}

fn as_pairs(l: &NeighborList) -> Vec<(usize, f64)> {
    l.indices.iter().copied().zip(l.distances.iter().copied()).collect()
}

// 4. Tree backends agree with the brute-force definition.
fn index_oracle() -> Outcome {
    let mut compared = 0usize;
    for d in [2usize, 10, 30] {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + d as u64);
        let continuous = Array2::from_shape_fn((1000, d), |_| rng.random::<f64>());
        // small integer grid: many exact ties and duplicate points
        let lattice = Array2::from_shape_fn((1000, d), |_| rng.random_range(0..3) as f64);
        for (label, x) in [("uniform", &continuous), ("lattice", &lattice)] {
            let indexes: Vec<(Backend, NeighborIndex<'_>)> = [Backend::Brute, Backend::Kd, Backend::Ball]
                .into_iter()
                .map(|b| (b, NeighborIndex::build(x.view(), b).unwrap()))
                .collect();
            for k in [1usize, 5, 50] {
                for include_self in [false, true] {
                    for q in 0..x.nrows() {
                        let want = oracle_neighbors(x, q, k, include_self);
                        for (b, index) in &indexes {
                            let got = index.knn_query(q, k, include_self).map_err(|e| e.to_string())?;
                            if as_pairs(&got) != want {
                                return Err(format!(
                                    "{b} on {label} d={d} k={k} self={include_self} query {q} differs"
                                ));
                            }
                            compared += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{compared} queries identical across brute, kd, ball"))
}

// 5. Orientation and range contracts of the detectors.
fn sanity_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut x = gaussian(300, 4, 505);
    x.row_mut(123).fill(25.0);
    let mut maximal = Vec::new();
    for cfg in all_detectors(10, 5) {
        let s = cfg.score(x.view()).map_err(|e| e.to_string())?;
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if s[123] == max {
            maximal.push(cfg.name());
        } else {
            failures.push(format!("{}: planted outlier scored {} below the maximum {max}", cfg.name(), s[123]));
        }
    }

    let y = gaussian(150, 3, 506);
    for k in [2usize, 5, 20] {
        let s = DetectorConfig::from_name("nc", k, 0).unwrap().score(y.view()).map_err(|e| e.to_string())?;
        if let Some(v) = s.iter().find(|v| v.fract() != 0.0 || **v < 0.0 || **v > k as f64) {
            failures.push(format!("nc k={k}: score {v} is not an integer in [0, {k}]"));
        }
    }
    for seed in 0..5 {
        let s = DetectorConfig::from_name("iforest", 0, seed).unwrap().score(y.view()).map_err(|e| e.to_string())?;
        if let Some(v) = s.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            failures.push(format!("iforest seed {seed}: score {v} outside (0, 1)"));
        }
    }

    let mut refinements = 0;
    for (n, d, seed) in [(300usize, 4usize, 1u64), (80, 6, 2), (40, 2, 3)] {
        let data = gaussian(n, d, 600 + seed);
        let fit = fit_mcd(data.view(), seed, 50, 20).map_err(|e| e.to_string())?;
        for (start, trace) in fit.traces.iter().enumerate() {
            for (t, w) in trace.windows(2).enumerate() {
                let slack = 1e-9 * (1.0 + w[0].used_logdet.abs());
                if w[1].raw_logdet > w[0].used_logdet + slack {
                    failures.push(format!(
                        "MCD n={n} d={d} start {start} step {t}: log det rose {} -> {}",
                        w[0].used_logdet, w[1].raw_logdet
                    ));
                }
                refinements += 1;
            }
        }
    }
    let detail = format!(
        "planted outlier maximal for {} of 8 ({}); {refinements} C-steps checked",
        maximal.len(),
        maximal.join(", ")
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

/// Published reference AUCs: (file prefix, [(detector, plain, nr)]).
const REFERENCE_AUC: [(&str, [(&str, f64, f64); 8]); 6] = [
    ("Stamps", [("mod", 0.90, 0.96), ("lof", 0.89, 0.95), ("odin", 0.83, 0.90), ("nc", 0.68, 0.83), ("knn", 0.91, 0.97), ("mcd", 0.85, 0.95), ("iforest", 0.86, 0.96), ("pcad", 0.90, 0.94)]),
    ("Cardiotocography", [("mod", 0.54, 0.68), ("lof", 0.59, 0.59), ("odin", 0.61, 0.61), ("nc", 0.57, 0.63), ("knn", 0.55, 0.69), ("mcd", 0.49, 0.80), ("iforest", 0.70, 0.79), ("pcad", 0.75, 0.86)]),
    ("Pima", [("mod", 0.68, 0.68), ("lof", 0.69, 0.64), ("odin", 0.63, 0.61), ("nc", 0.57, 0.60), ("knn", 0.73, 0.69), ("mcd", 0.68, 0.72), ("iforest", 0.67, 0.70), ("pcad", 0.63, 0.66)]),
    ("SpamBase", [("mod", 0.55, 0.58), ("lof", 0.49, 0.59), ("odin", 0.52, 0.56), ("nc", 0.55, 0.56), ("knn", 0.57, 0.60), ("mcd", 0.46, 0.74), ("iforest", 0.64, 0.71), ("pcad", 0.55, 0.66)]),
    ("HeartDisease", [("mod", 0.62, 0.78), ("lof", 0.67, 0.66), ("odin", 0.61, 0.68), ("nc", 0.58, 0.62), ("knn", 0.68, 0.78), ("mcd", 0.64, 0.88), ("iforest", 0.65, 0.79), ("pcad", 0.62, 0.73)]),
    ("Parkinson", [("mod", 0.64, 0.76), ("lof", 0.60, 0.78), ("odin", 0.53, 0.77), ("nc", 0.56, 0.62), ("knn", 0.66, 0.77), ("mcd", 0.64, 0.72), ("iforest", 0.47, 0.76), ("pcad", 0.38, 0.78)]),
];

fn find_arff(dir: &Path, prefix: &str) -> Option<PathBuf> {
    let mut hits: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("").to_ascii_lowercase();
            name.starts_with(&prefix.to_ascii_lowercase()) && name.ends_with(".arff")
        })
        .collect();
    hits.sort();
    hits.into_iter().next()
}

// 6. Published per-dataset numbers, when the benchmark files are present.
fn reference_reproduction() -> Status {
    let Some(dir) = std::env::var_os("NREP_DATA_DIR").map(PathBuf::from) else {
        return Status::Skip("set NREP_DATA_DIR to a directory with the six benchmark ARFF files".into());
    };
    let files: Vec<Option<PathBuf>> = REFERENCE_AUC.iter().map(|(p, _)| find_arff(&dir, p)).collect();
    if let Some(i) = files.iter().position(Option::is_none) {
        return Status::Skip(format!("no {}*.arff in {}", REFERENCE_AUC[i].0, dir.display()));
    }
    let opts = ArffOptions {
        exclude: vec!["id".into()],
        ..ArffOptions::default()
    };
    let mut failures = Vec::new();
    let (mut sum_plain, mut sum_nr, mut cells) = (0.0, 0.0, 0.0);
    for ((name, expected), path) in REFERENCE_AUC.iter().zip(&files) {
        let raw = match load_arff(path.as_ref().unwrap(), &opts) {
            Ok(ds) => ds,
            Err(e) => return Status::Fail(format!("{name}: {e}")),
        };
        let ds = preprocess(&raw, true, true);
        for &(det, ref_plain, ref_nr) in expected {
            let cfg = DetectorConfig::from_name(det, 0, 0).unwrap();
            let (plain, nr) = match (
                best_auc(&ds, &cfg, 2, 100, Mode::Plain),
                best_auc(&ds, &cfg, 2, 100, Mode::Nr),
            ) {
                (Ok(p), Ok(n)) => (p.1, n.1),
                (Err(e), _) | (_, Err(e)) => return Status::Fail(format!("{name}/{det}: {e}")),
            };
            println!("    {name:<16} {det:<8} plain {plain:.3} (ref {ref_plain:.2})  nr {nr:.3} (ref {ref_nr:.2})");
            sum_plain += plain;
            sum_nr += nr;
            cells += 1.0;
            match det {
                "knn" | "lof" | "odin" | "mod" => {
                    for (mode, got, want) in [("plain", plain, ref_plain), ("nr", nr, ref_nr)] {
                        if (got - want).abs() > 0.08 {
                            failures.push(format!("{name}/{det}/{mode} {got:.3} vs {want:.2}"));
                        }
                    }
                }
                "mcd" | "iforest" | "pcad" if nr < plain - 0.02 => {
                    failures.push(format!("{name}/{det}: nr {nr:.3} < plain {plain:.3} - 0.02"));
                }
                _ => {}
            }
        }
    }
    let (mp, mn) = (sum_plain / cells, sum_nr / cells);
    if mn < mp + 0.05 {
        failures.push(format!("mean NR {mn:.3} < mean plain {mp:.3} + 0.05"));
    }
    let detail = format!("mean plain {mp:.3}, mean NR {mn:.3}");
    if failures.is_empty() {
        Status::Pass(detail)
    } else {
        Status::Fail(format!("{detail}; {}", failures.join("; ")))
    }
}

// 7. The first iteration carries the gain; later ones stay close.
fn iteration_shape() -> Outcome {
    let raw = synth_collective(150, 60, 6.0, 0.3, 11).map_err(|e| e.to_string())?;
    let ds = preprocess(&raw, true, true);
    let mut mean = [0.0f64; 6];
    let dets = all_detectors(0, 3);
    for cfg in &dets {
        let study = iteration_study(&ds, cfg, 5, 2..=40).map_err(|e| e.to_string())?;
        for (t, row) in study.rows.iter().enumerate() {
            mean[t] += row.auc / dets.len() as f64;
        }
    }
    let curve = mean.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");
    if mean[1] < mean[0] {
        return Err(format!("iteration 1 below iteration 0: {curve}"));
    }
    if let Some(t) = (2..=5).find(|&t| (mean[t] - mean[1]).abs() > 0.05) {
        return Err(format!("iteration {t} deviates from iteration 1 by more than 0.05: {curve}"));
    }
    Ok(format!("mean AUC by iteration 0..5: {curve}"))
}

// 8. Two identical benchmark invocations write identical bytes.
fn bench_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_nrep");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let args = [
        "bench",
        "synth:120,20,6,0.25,5",
        "synth:80,40,4,0.5,6",
        "--detector",
        "knn,lof,odin,nc,mod,mcd,iforest,pcad",
        "--k-max",
        "15",
        "--seed",
        "9",
        "--seed-runs",
        "2",
        "--format",
        "csv,json",
        "--out",
        "run",
    ];
    for dir in &dirs {
        let out = Command::new(bin).args(args).current_dir(dir.path()).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("nrep bench exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
        }
    }
    let files = ["run.records.csv", "run.summary.csv", "run.improvements.csv", "run.config", "run.json"];
    for f in files {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            return Err(format!("{f} differs between runs"));
        }
    }
    Ok(format!("{} output files byte-identical", files.len()))
}

fn main() {
    let checks: Vec<(&str, Duration, Box<dyn Fn() -> Status>)> = vec![
        ("k=1 identity", Duration::from_secs(10), Box::new(|| status(k1_identity()))),
        ("collective-outlier rescue", Duration::from_secs(30), Box::new(|| status(collective_rescue()))),
        ("AUC oracle", Duration::from_secs(5), Box::new(|| status(auc_oracle()))),
        ("k-NN index oracle", Duration::from_secs(30), Box::new(|| status(index_oracle()))),
        ("detector sanity", Duration::from_secs(60), Box::new(|| status(sanity_suite()))),
        ("published table reproduction", Duration::MAX, Box::new(reference_reproduction)),
        ("iteration-study shape", Duration::from_secs(300), Box::new(|| status(iteration_shape()))),
        ("bench determinism", Duration::MAX, Box::new(|| status(bench_determinism()))),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Status::Pass(d) if elapsed > *limit => {
                Status::Fail(format!("{d}; took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            r => r,
        };
        let (tag, detail) = match result {
            Status::Pass(d) => ("PASS", d),
            Status::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Status::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {} {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}

fn status(o: Outcome) -> Status {
    match o {
        Ok(d) => Status::Pass(d),
        Err(d) => Status::Fail(d),
    }
}
