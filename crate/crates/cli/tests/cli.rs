use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fmuod_cli::io::{self, Layout};
use fmuod_core::simulation::{generate, ModelId, SimulationSpec};
use fmuod_core::{classify_outliers, compute_index_table, reference_from_sample, CutoffSpec, IndexVariant, Location};

fn fmuod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmuod")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    fmuod(args).status.code().unwrap()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn simulated_long_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    assert_eq!(code(&["simulate", "--model", "M1", "--seed", "11", "--out", &s(&out)]), 0);
    let loaded = io::read(&out.join("data.csv"), Layout::Long, b',', true).unwrap();
    let expected = generate(&SimulationSpec::standard(ModelId::M1, 11)).unwrap();
    assert_eq!(loaded.data.values(), expected.data.values());
    // Header plus one row per outlier.
    assert_eq!(lines(&out.join("truth.csv")).len(), 1 + 10);
}

#[test]
fn wide_univariate_detection_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate(&SimulationSpec::standard(ModelId::M1, 3)).unwrap();
    let margin = ds.data.margin(0);
    let text: String = margin
        .rows()
        .map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    let input = dir.path().join("wide.csv");
    fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let status = code(&["detect", "--input", &s(&input), "--layout", "wide", "--method", "FST_MAR", "--out", &s(&out)]);
    assert_eq!(status, 0);

    let reference = reference_from_sample(&margin, Location::Median).unwrap();
    let table = compute_index_table(&margin, &reference, IndexVariant::Standard).unwrap();
    let want: Vec<String> =
        classify_outliers(&table, &CutoffSpec::default()).unwrap().union.iter().map(|i| i.to_string()).collect();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let got: Vec<String> =
        report["flags"]["union"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(got, want);
    assert!(!got.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(&dir.path().join("out"));
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        s(&p)
    };

    assert_eq!(code(&["detect", "--input", &s(&dir.path().join("missing.csv")), "--out", &out]), 3);
    assert_eq!(code(&["detect", "--input", &write("empty.csv", ""), "--out", &out]), 2);
    let bad = write("bad.csv", "curve_id,t_index,dim_1\na,0,1\na,1,oops\n");
    assert_eq!(code(&["detect", "--input", &bad, "--out", &out]), 2);
    assert_eq!(code(&["detect", "--bogus"]), 3);
    assert_eq!(code(&["simulate", "--model", "M9", "--out", &out]), 3);

    let sim = dir.path().join("sim");
    assert_eq!(code(&["simulate", "--out", &s(&sim)]), 0);
    let data = s(&sim.join("data.csv"));
    assert_eq!(code(&["detect", "--input", &data, "--method", "FST_PRJ", "--out", &out]), 3);
    assert_eq!(code(&["detect", "--input", &data, "--method", "FST_MAR", "--tau-shape", "0.5", "--out", &out]), 3);

    // Every curve is constant, so the median reference is too.
    let constant: String = (0..6).map(|i| format!("{}\n", vec![(i % 2).to_string(); 8].join(","))).collect();
    let flat = write("flat.csv", &constant);
    assert_eq!(code(&["detect", "--input", &flat, "--layout", "wide", "--method", "FST_MAR", "--out", &out]), 4);
}

#[test]
fn benchmark_and_sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench");
    let status = code(&["benchmark", "--model", "M1", "--method", "FST_PRJ1", "--reps", "3", "--out", &s(&bench)]);
    assert_eq!(status, 0);
    let rows = lines(&bench.join("benchmark.csv"));
    assert_eq!(rows.len(), 2, "{rows:?}");
    assert!(rows[0].starts_with("model,method,scope,reps,tpr_mean"));

    let all = dir.path().join("all");
    let status = code(&["benchmark", "--model", "M1", "--scope", "all", "--reps", "2", "--out", &s(&all)]);
    assert_eq!(status, 0);
    assert_eq!(lines(&all.join("benchmark.csv")).len(), 5);

    let sweep = dir.path().join("sweep");
    let status = code(&["sweep", "--model", "M1", "--q", "0.2,0.2,0.2", "--q", "1,1,1", "--reps", "2", "--out", &s(&sweep)]);
    assert_eq!(status, 0);
    assert_eq!(lines(&sweep.join("sweep.csv")).len(), 3);
}

#[test]
fn baselines_file_feeds_adaptive_detection() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base");
    assert_eq!(code(&["baselines", "--reps", "3", "--out", &s(&base)]), 0);
    let sim = dir.path().join("sim");
    assert_eq!(code(&["simulate", "--model", "M3", "--out", &s(&sim)]), 0);
    let out = dir.path().join("out");
    let args = [
        "detect", "--input", &s(&sim.join("data.csv")), "--method", "FST_PRJ", "--baselines",
        &s(&base.join("baselines.json")), "--out", &s(&out),
    ];
    assert_eq!(code(&args), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["method"], "FST_PRJ");
    let tau = report["thresholds"]["shape"].as_f64().unwrap();
    assert!((0.4..=0.7).contains(&tau), "{tau}");
    // One tidy row per curve and type.
    assert_eq!(lines(&out.join("flags.csv")).len(), 1 + 3 * 100);
}
