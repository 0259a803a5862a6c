//! End-to-end tests of the `sabicluster` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sabicluster_core::metrics::score;
use sabicluster_core::synth::PlantedBlock;
use sabicluster_core::{load_sessions, AcvThreshold, BiclusterRecord, InputFormat};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sabicluster"));
    c.env_remove("BICLUSTER_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Small planted benchmark, written to `dir/matrix.csv`.
fn small_synth(dir: &Path) -> PathBuf {
    ok(&[
        "synth", "--rows", "30", "--cols", "8", "--block-rows", "10", "--block-cols", "4", "--seed", "3",
        "--output-dir", s(dir),
    ]);
    dir.join("matrix.csv")
}

const CATALOG: &str = "code,label\n1,frontpage\n2,news\n3,tech\n";

fn clickstream(dir: &Path) -> (PathBuf, PathBuf) {
    let cat = dir.join("catalog.csv");
    fs::write(&cat, CATALOG).unwrap();
    let log = dir.join("sessions.txt");
    fs::write(
        &log,
        "a: 1,2\nb: 1,2,3,3,1\nc: 1,1,1,2,2,3,3,3,2,1\nd: 1,2,3,1,2,3,1,2,3,1,2\ne: 3,3,3,2,2,1\n",
    )
    .unwrap();
    (log, cat)
}

#[test]
fn preprocess_vacuous_filter_keeps_all_rows() {
    let dir = TempDir::new().unwrap();
    let (log, cat) = clickstream(dir.path());
    let out = dir.path().join("out");
    ok(&[
        "preprocess", "--input", s(&log), "--catalog", s(&cat), "--min-len", "1", "--max-len", "999999",
        "--output-dir", s(&out),
    ]);
    let m = load_sessions(&out.join("matrix.csv"), InputFormat::MatrixCsv, None).unwrap();
    assert_eq!(m.n_rows(), 5);
    assert_eq!(m.n_cols(), 3);
    assert!(m.is_normalized());
    let summary = read_json(out.join("preprocess_summary.json"));
    assert_eq!(summary["sessions_dropped"], 0);
}

#[test]
fn preprocess_length_window() {
    let dir = TempDir::new().unwrap();
    let (log, cat) = clickstream(dir.path());
    ok(&[
        "preprocess", "--input", s(&log), "--catalog", s(&cat), "--min-len", "5", "--max-len", "10",
        "--output-dir", s(dir.path()),
    ]);
    let m = load_sessions(&dir.path().join("matrix.csv"), InputFormat::MatrixCsv, None).unwrap();
    assert_eq!(m.session_ids(), ["b", "c", "e"]);
    let summary = read_json(dir.path().join("preprocess_summary.json"));
    assert_eq!(summary["sessions_kept"], 3);
    assert_eq!(summary["sessions_dropped"], 2);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let (log, _) = clickstream(dir.path());
    let missing = dir.path().join("nope.csv");

    let out = run(&["preprocess", "--input", s(&log), "--catalog", s(&missing), "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--catalog"));

    let out = run(&["preprocess", "--input", s(&log), "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--catalog"));

    let out = run(&["sa", "--input", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let m = small_synth(dir.path());
    let out = run(&["sa", "--input", s(&m), "--delta", "1.5", "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["greedy", "--input", s(&m), "--output-dir", s(dir.path())])
        .env("BICLUSTER_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // A raw count matrix has not been through preprocess.
    let raw = dir.path().join("raw.csv");
    fs::write(&raw, "session,a,b\ns1,3,4\ns2,1,2\n").unwrap();
    let out = run(&["sa", "--input", s(&raw), "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    // Parse error with line context.
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a: 1,2\nb: 1,9\n").unwrap();
    let cat = dir.path().join("catalog.csv");
    let out = run(&["preprocess", "--input", s(&bad), "--catalog", s(&cat), "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sa_defaults_are_echoed() {
    let dir = TempDir::new().unwrap();
    let m = small_synth(dir.path());
    ok(&["sa", "--input", s(&m), "--population", "10", "--output-dir", s(dir.path())]);
    let report = read_json(dir.path().join("report.json"));
    let echo = &report["config_echo"];
    assert_eq!(echo["t_initial"], 50.0);
    assert_eq!(echo["alpha"], 0.7);
    assert_eq!(echo["t_min"], 0.01);
    assert_eq!(echo["delta"], 0.93);
    assert_eq!(echo["moves_per_temperature"], 20);
    assert_eq!(echo["population"], 10);
    assert_eq!(report["method"], "sa");
    assert!(report.get("elapsed_secs").is_none());

    let full = dir.path().join("full");
    ok(&["sa", "--input", s(&m), "--output-dir", s(&full)]);
    assert_eq!(read_json(full.join("report.json"))["config_echo"]["population"], 100);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let m = small_synth(dir.path());
    for method in ["sa", "greedy"] {
        let (a, b) = (dir.path().join(format!("{method}-a")), dir.path().join(format!("{method}-b")));
        for out in [&a, &b] {
            ok(&[method, "--input", s(&m), "--seed", "42", "--population", "20", "--output-dir", s(out)]);
        }
        for f in ["biclusters.json", "profiles.json", "profiles.csv", "report.json"] {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{method}/{f}");
        }
    }
}

#[test]
fn biclusters_round_trip_against_matrix() {
    let dir = TempDir::new().unwrap();
    let m_path = small_synth(dir.path());
    ok(&["sa", "--input", s(&m_path), "--population", "20", "--delta", "0.8", "--output-dir", s(dir.path())]);
    let m = load_sessions(&m_path, InputFormat::MatrixCsv, None).unwrap();
    let records: Vec<BiclusterRecord> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("biclusters.json")).unwrap()).unwrap();
    assert!(!records.is_empty());
    for r in &records {
        let b = r.to_bicluster(m.n_rows(), m.n_cols()).unwrap();
        let sc = score(&b, &m, AcvThreshold::new(0.8).unwrap()).unwrap();
        assert!((sc.fitness - r.fitness).abs() <= 1e-9);
        assert_eq!(sc.volume, r.volume);
        match (sc.acv, r.acv) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-9),
            (None, None) => {}
            other => panic!("acv mismatch {other:?}"),
        }
    }
    let report = read_json(dir.path().join("report.json"));
    assert_eq!(report["n_biclusters"], records.len());
}

#[test]
fn profile_command_matches_run_output() {
    let dir = TempDir::new().unwrap();
    let m = small_synth(dir.path());
    let run_dir = dir.path().join("run");
    ok(&["greedy", "--input", s(&m), "--population", "15", "--delta", "0.7", "--output-dir", s(&run_dir)]);
    let prof_dir = dir.path().join("prof");
    ok(&[
        "profile", "--input", s(&m), "--biclusters", s(&run_dir.join("biclusters.json")), "--output-dir",
        s(&prof_dir),
    ]);
    for f in ["profiles.json", "profiles.csv"] {
        assert_eq!(fs::read(run_dir.join(f)).unwrap(), fs::read(prof_dir.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(prof_dir.join("profiles.csv")).unwrap();
    assert!(csv.starts_with("profile,pages,weights,acv,user_percentage\n"));
}

#[test]
fn synth_sidecar_is_in_bounds() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--rows", "40", "--cols", "9", "--block-rows", "12", "--block-cols", "5", "--noise", "0", "--output-dir", s(dir.path())]);
    let planted: PlantedBlock = serde_json::from_str(&fs::read_to_string(dir.path().join("planted.json")).unwrap()).unwrap();
    assert_eq!((planted.rows.len(), planted.cols.len()), (12, 5));
    assert!(planted.rows.iter().all(|&r| r < 40) && planted.cols.iter().all(|&c| c < 9));
    let m = load_sessions(&dir.path().join("matrix.csv"), InputFormat::MatrixCsv, None).unwrap();
    let b = planted.bicluster(m.n_rows(), m.n_cols()).unwrap();
    assert!((sabicluster_core::acv(&b, &m).unwrap() - 1.0).abs() < 1e-12);

    let out = run(&["synth", "--rows", "10", "--cols", "5", "--block-rows", "11", "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_schema_and_single_seed() {
    let dir = TempDir::new().unwrap();
    let m = small_synth(dir.path());
    let out = ok(&["compare", "--input", s(&m), "--seed", "5", "--population", "10", "--output-dir", s(dir.path())]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean_acv"));

    let table = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("method,mean_volume,mean_acv,overlapping_degree,best_acv,worst_acv"));
    let methods: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["sa", "greedy"]);

    let per_seed = fs::read_to_string(dir.path().join("per_seed.csv")).unwrap();
    let rows: Vec<&str> = per_seed.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("5,")));

    let json = read_json(dir.path().join("comparison.json"));
    assert_eq!(json["seeds"], serde_json::json!([5]));
    assert_eq!(json["table"].as_array().unwrap().len(), 2);

    ok(&["compare", "--input", s(&m), "--seeds", "1,2,3", "--population", "5", "--output-dir", s(dir.path())]);
    let per_seed = fs::read_to_string(dir.path().join("per_seed.csv")).unwrap();
    assert_eq!(per_seed.lines().count(), 1 + 6);
}
