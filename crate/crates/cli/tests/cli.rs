use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const HEADER: [&str; 12] = [
    "scenario",
    "sweep_index",
    "seed",
    "t_req",
    "rtt_s",
    "energy_j",
    "normalized_energy",
    "time_s",
    "feasible",
    "wifi_share",
    "iterations",
    "inner_iterations",
];

fn offload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offload"))
        .args(args)
        .env("RUST_BACKTRACE", "0")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = offload(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Row {
    scenario: String,
    sweep_index: usize,
    seed: u64,
    t_req: f64,
    energy: Option<f64>,
    normalized: Option<f64>,
    time: Option<f64>,
    feasible: bool,
    wifi_share: Option<f64>,
    raw: Vec<String>,
}

fn opt(s: &str) -> Option<f64> {
    (!s.is_empty()).then(|| s.parse().unwrap())
}

fn read_rows(path: &Path) -> Vec<Row> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), HEADER);
    rdr.records()
        .map(|rec| {
            let rec = rec.unwrap();
            Row {
                scenario: rec[0].to_string(),
                sweep_index: rec[1].parse().unwrap(),
                seed: rec[2].parse().unwrap(),
                t_req: rec[3].parse().unwrap(),
                energy: opt(&rec[5]),
                normalized: opt(&rec[6]),
                time: opt(&rec[7]),
                feasible: rec[8].parse().unwrap(),
                wifi_share: opt(&rec[9]),
                raw: rec.iter().map(str::to_string).collect(),
            }
        })
        .collect()
}

#[test]
fn local_rows_normalize_to_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("local.csv");
    run_ok(&["--scenarios", "local", "--reps", "5", "--out", out.to_str().unwrap()]);
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r.scenario, "local");
        assert_eq!(r.normalized, Some(1.0));
        assert_eq!(r.wifi_share, None);
    }
}

#[test]
fn every_row_parses_and_feasible_rows_meet_the_deadline() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("all.csv");
    let stdout = run_ok(&[
        "--synth",
        "7,2",
        "--reps",
        "6",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("iterative vs exhaustive gap"));
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 4 * 6);
    let order: Vec<&str> = rows.iter().take(4).map(|r| r.scenario.as_str()).collect();
    assert_eq!(order, ["local", "remote", "exhaustive", "iterative"]);
    for r in &rows {
        if r.feasible {
            assert!(r.time.unwrap() <= r.t_req + 1e-9);
        }
        if let (Some(e), Some(n)) = (r.energy, r.normalized) {
            assert!(e > 0.0 && n > 0.0);
        }
    }
    let seeds: Vec<u64> = rows.iter().step_by(4).map(|r| r.seed).collect();
    assert_eq!(seeds, (3..9).collect::<Vec<_>>());
}

#[test]
fn deadline_sweep_is_ordered_and_exhaustive_energy_never_rises() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    run_ok(&[
        "--scenarios",
        "exhaustive",
        "--t-req-sweep",
        "0.5:4:8",
        "--reps",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 8 * 4);
    assert!(rows.windows(2).all(|w| w[0].t_req <= w[1].t_req));
    for seed in 0..4 {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.seed == seed).collect();
        assert_eq!(
            mine.iter().map(|r| r.sweep_index).collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
        // infeasible below the fastest placement, feasible from some point on
        let flips = mine.windows(2).filter(|w| w[0].feasible != w[1].feasible).count();
        assert!(flips <= 1);
        assert!(!mine[0].feasible && mine[7].feasible);
        let energies: Vec<f64> = mine.iter().filter_map(|r| r.energy).collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}

#[test]
fn equal_sweep_points_give_identical_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("flat.csv");
    run_ok(&[
        "--scenarios",
        "exhaustive,iterative",
        "--t-req-sweep",
        "2.5:2.5:2",
        "--reps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_rows(&out);
    let (first, second): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|r| r.sweep_index == 0);
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.raw[0], b.raw[0]);
        assert_eq!(a.raw[2..], b.raw[2..]);
    }
}

#[test]
fn runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "--rtt-sweep".to_string(),
            "wifi:0.04:0.16:3".into(),
            "--reps".into(),
            "5".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &Path| {
        let v = args(p);
        run_ok(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(run(&a), run(&b).replace("b.csv", "a.csv"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rows = read_rows(&a);
    assert_eq!(rows.len(), 3 * 5 * 4);
    let rtts: Vec<&str> = rows.iter().map(|r| r.raw[4].split(';').next().unwrap()).collect();
    assert_eq!(rtts[0], "0.04");
    assert_eq!(rtts[rtts.len() - 1], "0.16");
}

#[test]
fn fixed_instance_file_is_used_as_given() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(&inst, offload_core::Instance::profile14().to_json()).unwrap();
    let out = dir.path().join("fixed.csv");
    run_ok(&[
        "--instance",
        inst.to_str().unwrap(),
        "--no-resample",
        "--scenarios",
        "remote",
        "--reps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_rows(&out);
    assert!(rows.windows(2).all(|w| w[0].raw[5..] == w[1].raw[5..]));
}

#[test]
fn unwritable_output_is_reported() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let res = offload(&["--scenarios", "local", "--reps", "1", "--out", out.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("writing"));
}

#[test]
fn bad_instances_are_reported_with_context() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("bad.json");
    std::fs::write(&inst, r#"{"graph": {}}"#).unwrap();
    let res = offload(&[
        "--instance",
        inst.to_str().unwrap(),
        "--out",
        dir.path().join("o.csv").to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("loading instance") && err.contains("bad.json"), "{err}");
}

#[test]
fn invalid_runs_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.csv");
    let out = out.to_str().unwrap();
    for args in [
        vec!["--reps", "0", "--out", out],
        vec!["--rtt-sweep", "0:0.04:0.16:3", "--rtt-model", "off", "--out", out],
        vec!["--rtt-sweep", "bluetooth:0.04:0.16:3", "--out", out],
        vec!["--rtt-sweep", "5:0.04:0.16:3", "--out", out],
        vec!["--t-req-sweep", "3:1:4", "--out", out],
        vec!["--scenarios", "cloud", "--out", out],
        vec!["--synth", "8", "--out", out],
    ] {
        let res = offload(&args);
        assert!(!res.status.success(), "{args:?} should fail");
    }
    assert!(!Path::new(out).exists());
}
