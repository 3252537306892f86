use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn boostlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boostlab"))
        .args(args)
        .env_remove("BOOSTLAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn run_three_example_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.csv");
    let report = dir.path().join("summary.json");
    let o = boostlab(&[
        "run",
        "--dataset",
        "three-example",
        "--rounds",
        "100",
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,j,r,delta,alpha,loss,l1_norm,scale,loss_Z,loss_F,R,S");
    assert_eq!(lines.len(), 101);
    let last: Vec<&str> = lines[100].split(',').collect();
    assert_eq!(last[0], "100");
    let loss: f64 = last[5].parse().unwrap();
    assert!((loss - 2.0 / 3.0 * 1.01f64.sqrt()).abs() < 1e-9);

    let summary: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(summary["rounds_run"], 100);
    assert_eq!(summary["status"], "completed");
    assert!((summary["final_loss"].as_f64().unwrap() - loss).abs() < 1e-15);
}

#[test]
fn scaled_run_keeps_scales_in_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("s.csv");
    let o = boostlab(&[
        "run",
        "--dataset",
        "triangular:5",
        "--variant",
        "scaled",
        "--rounds",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&trace).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let s: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&s));
        rows += 1;
    }
    assert_eq!(rows, 50);
}

#[test]
fn malformed_file_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2\n1 0\n0 seven\n").unwrap();
    let source = format!("file:{}", bad.display());
    let o = boostlab(&["run", "--dataset", &source]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn matrix_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, "# three examples\n3 2\n1 -1\n-1 1\n1 1\n").unwrap();
    let source = format!("file:{}", path.display());
    let o = boostlab(&["run", "--dataset", &source, "--rounds", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 3);
    assert!((v["final_loss"].as_f64().unwrap() - 2.0 / 3.0 * 1.2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn perfect_separation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sep.txt");
    fs::write(&path, "2 1\n1\n1\n").unwrap();
    let source = format!("file:{}", path.display());
    let o = boostlab(&["run", "--dataset", &source, "--rounds", "5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn decompose_reports() {
    let o = boostlab(&["decompose", "--dataset", "three-example"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["Z"], serde_json::json!(["c"]));
    assert!((v["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["lambda_min"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["K_F"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = boostlab(&["decompose", "--dataset", "mint-mumax:5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["Z"], serde_json::json!([]));
    assert_eq!(v["regime"], "finite-optimum");

    let o = boostlab(&["decompose", "--dataset", "triangular:5"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["Z"], serde_json::json!([2, 3, 4]));
}

#[test]
fn verify_suites_and_usage_errors() {
    let o = boostlab(&["verify", "trace-identities"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[PASS]"));
    let o = boostlab(&["verify", "lower-bounds"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(code(&boostlab(&["verify", "no-such-suite"])), 64);
    assert_eq!(code(&boostlab(&["run"])), 64);
    assert_eq!(code(&boostlab(&["frobnicate"])), 64);
    assert_eq!(code(&boostlab(&["--help"])), 0);
}

#[test]
fn reference_and_plot_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let plot = dir.path().join("p.csv");
    let report = dir.path().join("r.json");
    let o = boostlab(&[
        "run",
        "--dataset",
        "three-example",
        "--rounds",
        "1000",
        "--reference",
        "auto:near-optimal:0.1",
        "--target-eps",
        "0.05",
        "--decompose",
        "--trace",
        trace.to_str().unwrap(),
        "--plot-data",
        plot.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["status"], "target-reached");
    let rounds = v["rounds_run"].as_u64().unwrap();
    assert!(rounds as f64 <= v["reference"]["rounds_bound_plain"].as_f64().unwrap());

    let csv = fs::read_to_string(&trace).unwrap();
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    // loss_Z, loss_F and R are filled; S needs a distance grid
    assert!(!first[8].is_empty() && !first[9].is_empty() && !first[10].is_empty());
    assert!(first[11].is_empty());

    let plot = fs::read_to_string(&plot).unwrap();
    assert!(plot.starts_with("t,loss,delta,envelope\n"));
    for line in plot.lines().skip(2) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1] <= f[3], "loss above the rate envelope: {line}");
    }
}

#[test]
fn distance_grid_fills_s_column() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = boostlab(&[
        "run",
        "--dataset",
        "three-example",
        "--rounds",
        "10",
        "--reference",
        "1,1",
        "--distance-grid=-2,5,41,4",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&trace).unwrap();
    for line in csv.lines().skip(1) {
        let s: f64 = line.split(',').nth(11).unwrap().parse().unwrap();
        assert!(s >= 0.0);
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let t = dir.path().join(format!("t{k}.csv"));
        let r = dir.path().join(format!("r{k}.json"));
        let o = boostlab(&[
            "run",
            "--dataset",
            "random:5:3:continuous",
            "--seed",
            "9",
            "--rounds",
            "40",
            "--decompose",
            "--trace",
            t.to_str().unwrap(),
            "--report",
            r.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outputs.push((fs::read(&t).unwrap(), fs::read(&r).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let run = |env: Option<&str>, seed: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_boostlab"));
        c.args(["run", "--dataset", "random:4:2:ternary", "--rounds", "3", "--seed", seed]);
        match env {
            Some(v) => c.env("BOOSTLAB_SEED", v),
            None => c.env_remove("BOOSTLAB_SEED"),
        };
        let o = c.output().unwrap();
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, "3"), 3);
    assert_eq!(run(Some("11"), "3"), 11);
}
