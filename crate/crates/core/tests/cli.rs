use std::path::Path;
use std::process::{Command, Output};

fn nrep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrep"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run nrep")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn synth_file(dir: &Path, name: &str, n_normal: &str, n_outlier: &str) {
    let out = nrep(dir, &["synth", "--n-normal", n_normal, "--n-outlier", n_outlier, "--seed", "3", "--out", name]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn score_writes_one_line_per_row() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "d.csv", "90", "10");
    let out = nrep(dir.path(), &["score", "d.csv", "--detector", "knn", "--k", "5", "--out", "s.txt"]);
    assert!(out.status.success());
    assert_eq!(read(dir.path(), "s.txt").lines().count(), 100);
    let config = read(dir.path(), "s.txt.config");
    assert!(config.contains("detector = knn\n") && config.contains("k = 5\n"));
}

#[test]
fn nr_with_k1_equals_plain() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "d.csv", "60", "15");
    for det in ["knn", "lof", "iforest", "pcad"] {
        let plain = nrep(dir.path(), &["score", "d.csv", "--detector", det, "--k", "1"]);
        let nr = nrep(dir.path(), &["score", "d.csv", "--detector", det, "--k", "1", "--nr"]);
        assert!(plain.status.success() && nr.status.success(), "{det}");
        assert_eq!(plain.stdout, nr.stdout, "{det}");
    }
}

#[test]
fn duplicate_rows_share_scores() {
    let dir = tempfile::tempdir().unwrap();
    let rows = "x,y,outlier\n0,0,0\n1,0,0\n0,0,0\n0,1,0\n1,1,0\n5,5,1\n1,0,0\n";
    std::fs::write(dir.path().join("d.csv"), rows).unwrap();
    let out = nrep(dir.path(), &["score", "d.csv", "--detector", "knn", "--k", "2", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let scores = v["result"]["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 7);
    assert_eq!(scores[2], scores[0]);
    assert_eq!(scores[6], scores[1]);
    let dup = v["result"]["duplicate_of"].as_array().unwrap();
    assert_eq!(dup[2], 0);
    assert_eq!(dup[6], 1);
    assert!(dup[0].is_null());
    assert_eq!(v["result"]["n_scored"], 5);
}

#[test]
fn creates_output_directories() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "d.csv", "20", "2");
    let out = nrep(dir.path(), &["score", "d.csv", "--detector", "knn", "--out", "a/b/s.txt"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("a/b/s.txt")).unwrap().lines().count(), 22);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "d.csv", "20", "2");
    assert_eq!(nrep(dir.path(), &["score", "d.csv", "--detector", "nope"]).status.code(), Some(1));
    assert_eq!(nrep(dir.path(), &["score", "d.csv", "--detector", "knn", "--k", "500"]).status.code(), Some(1));
    assert_eq!(nrep(dir.path(), &["score", "missing.csv", "--detector", "knn"]).status.code(), Some(2));
    assert_eq!(nrep(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(nrep(dir.path(), &["--help"]).status.code(), Some(0));
    // a regular file where the output directory should be
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = ["score", "d.csv", "--detector", "knn", "--out", "blocker/s.txt"];
    assert_eq!(nrep(dir.path(), &out).status.code(), Some(3));
    let err = nrep(dir.path(), &["score", "missing.csv", "--detector", "knn"]);
    assert_eq!(String::from_utf8_lossy(&err.stderr).lines().count(), 1);
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrep(
        dir.path(),
        &["bench", "synth:60,10,6,0.2,1", "--detector", "lof", "--k-max", "10", "--format", "csv,json", "--out", "b"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read(dir.path(), "b.summary.csv");
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(read(dir.path(), "b.improvements.csv").lines().count(), 2);
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "b.json")).unwrap();
    assert_eq!(v["result"]["summary"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["k_max"], 10);
}

#[test]
fn bench_continues_past_missing_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrep(
        dir.path(),
        &["bench", "gone.arff", "synth:40,6,6,0.2,1", "--detector", "knn", "--k-max", "6", "--out", "b"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(read(dir.path(), "b.summary.csv").lines().count(), 3);
}

#[test]
fn sweep_has_one_row_per_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrep(dir.path(), &["sweep", "synth:50,8,6,0.2,2", "--detector", "odin", "--k-min", "3", "--k-max", "17", "--nr"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 15);
}

#[test]
fn iterstudy_has_eleven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrep(dir.path(), &["iterstudy", "synth:50,8,6,0.2,2", "--detector", "knn", "--k-max", "8", "--out", "it.csv"]);
    assert!(out.status.success());
    assert_eq!(read(dir.path(), "it.csv").lines().count(), 1 + 11);
    assert_eq!(read(dir.path(), "it.csv.curve.csv").lines().count(), 1 + 11 * 7);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "a.csv", "30", "5");
    synth_file(dir.path(), "b.csv", "30", "5");
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
}

#[test]
fn auc_of_separating_scores() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.txt"), "0.1\n0.2\n0.9\n0.8\n").unwrap();
    std::fs::write(dir.path().join("l.txt"), "0\n0\n1\n1\n").unwrap();
    let out = nrep(dir.path(), &["auc", "--scores", "s.txt", "--labels", "l.txt"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.0\n");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# sweep defaults\ndataset = synth:40,6,6,0.2,1\ndetector = knn\nk_min = 2\nk-max = 12\nnr = true\n",
    )
    .unwrap();
    let from_file = nrep(dir.path(), &["sweep", "--config", "run.conf"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let text = String::from_utf8_lossy(&from_file.stdout).to_string();
    assert_eq!(text.lines().count(), 1 + 11);
    assert!(text.lines().nth(1).unwrap().starts_with("knn,nr,"));

    let overridden = nrep(dir.path(), &["sweep", "--config", "run.conf", "--k-max", "5", "--detector", "lof"]);
    let text = String::from_utf8_lossy(&overridden.stdout).to_string();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.lines().nth(1).unwrap().starts_with("lof,nr,"));

    std::fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    let bad = nrep(dir.path(), &["sweep", "synth:40,6,6,0.2,1", "--detector", "knn", "--config", "bad.conf"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn written_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = nrep(dir.path(), &["bench", "synth:40,8,5,0.3,4", "--detector", "mcd,nc", "--k-max", "9", "--seed", "5", "--out", "a"]);
    assert!(first.status.success());
    let again = nrep(dir.path(), &["bench", "--config", "a.config", "--out", "b"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(read(dir.path(), "a.records.csv"), read(dir.path(), "b.records.csv"));
    assert_eq!(read(dir.path(), "a.config"), read(dir.path(), "b.config"));
}

#[test]
fn representatives_export() {
    let dir = tempfile::tempdir().unwrap();
    synth_file(dir.path(), "d.csv", "60", "15");
    let out = nrep(dir.path(), &["score", "d.csv", "--detector", "lof", "--k", "8", "--nr", "--representatives", "r.csv", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = v["result"]["n_representatives"].as_u64().unwrap() as usize;
    assert_eq!(read(dir.path(), "r.csv").lines().count(), 1 + m);
    assert!(m < 75);
}
