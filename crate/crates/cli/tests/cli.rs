use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zeta};

fn hardcopy(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardcopy")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn simulate_writes_conserving_degree_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(
        &["simulate", "--alpha", "0.9", "--m", "1", "--steps", "100000", "--seed", "7", "--out", "run1/", "--edges"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run1");
    let degrees = read(run.join("degrees.csv"));
    assert!(degrees.starts_with("k,count,fraction\n"));
    let total: u64 = csv_rows(&degrees).iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 100_000);

    let trajectory = read(run.join("trajectory.csv"));
    assert!(trajectory.starts_with("t,e,max_degree,multi_edge_vertices,eta\n"));
    let last = csv_rows(&trajectory).pop().unwrap();
    assert_eq!(last[0], "100000");

    let summary: serde_json::Value = serde_json::from_str(&read(run.join("summary.json"))).unwrap();
    for key in ["params", "regime", "results", "seeds"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["results"]["t"], 100_000);
    assert_eq!(summary["results"]["e"].to_string(), last[1]);
    let degree_sum: u64 =
        csv_rows(&degrees).iter().map(|r| r[0].parse::<u64>().unwrap() * r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(degree_sum, 2 * summary["results"]["e"].as_u64().unwrap());

    let edges = read(run.join("edges.txt"));
    assert!(edges.starts_with(&format!("# t=100000 e={} m=1\n", last[1])));
}

#[test]
fn out_of_regime_run_records_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(&["simulate", "--alpha", "0.5", "--m", "1", "--steps", "2000", "--out", "r"], dir.path());
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path().join("r/summary.json"))).unwrap();
    let warnings = summary["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("2m(1-alpha) < alpha")));
    assert_eq!(summary["regime"]["theorem_regime"], false);
}

#[test]
fn invalid_parameters_exit_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(&["simulate", "--alpha", "0", "--m", "1", "--steps", "100", "--out", "x"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    assert!(!dir.path().join("x").exists());

    let o = hardcopy(
        &["ensemble", "--alpha", "0.9", "--m", "1", "--steps", "100", "--replicas", "1", "--out", "e"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("replicas"));

    let o = hardcopy(&["analytic", "--alpha", "0.4", "--m", "1", "--out", "a"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2m(1-alpha) < alpha"));

    let o = hardcopy(&["oracle", "--alpha", "0.9", "--m", "1", "--steps", "7", "--out", "o"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hardcopy(&["simulate", "--alpah", "0.9"], dir.path())), 1);
    assert_eq!(code(&hardcopy(&["simulate", "--alpha", "0.9", "--m", "1", "--out", "x"], dir.path())), 1);
    assert_eq!(code(&hardcopy(&["--help"], dir.path())), 0);

    fs::write(dir.path().join("blocker"), "a file").unwrap();
    let o = hardcopy(&["simulate", "--alpha", "0.9", "--m", "1", "--steps", "100", "--out", "blocker/sub"], dir.path());
    assert_eq!(code(&o), 3);
    let o = hardcopy(&["fit", "--input", "missing.csv"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn ensemble_is_byte_identical_for_same_master_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "ensemble",
            "--alpha",
            "0.9",
            "--m",
            "1",
            "--steps",
            "3000",
            "--replicas",
            "8",
            "--seed",
            "11",
            "--out",
            out,
        ]
    };
    assert_eq!(code(&hardcopy(&args("a"), dir.path())), 0);
    let mut threaded = args("b");
    threaded.extend(["--threads", "3"]);
    assert_eq!(code(&hardcopy(&threaded, dir.path())), 0);
    let names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() >= 3);
    for name in names {
        assert_eq!(
            fs::read(dir.path().join("a").join(&name)).unwrap(),
            fs::read(dir.path().join("b").join(&name)).unwrap()
        );
    }
    let dk = read(dir.path().join("a/dk_empirical.csv"));
    assert!(dk.starts_with("k,mean,stderr\n"));
    assert_eq!(read(dir.path().join("a/dk_empirical_t3000.csv")), dk);
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path().join("a/ensemble.json"))).unwrap();
    assert_eq!(doc["seeds"]["master_seed"], 11);
    assert_eq!(doc["seeds"]["replicas"].as_array().unwrap().len(), 8);
}

#[test]
fn ensemble_head_matches_d_m() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(
        &[
            "ensemble",
            "--alpha",
            "0.9",
            "--m",
            "1",
            "--steps",
            "100000",
            "--replicas",
            "50",
            "--seed",
            "3",
            "--out",
            "e",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&read(dir.path().join("e/dk_empirical.csv")));
    let row = rows.iter().find(|r| r[0] == "1").unwrap();
    let (mean, stderr): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    let d1 = 1.8 / 2.8;
    assert!((mean - d1).abs() <= 3.0 * stderr, "mean {mean} stderr {stderr}");
}

#[test]
fn analytic_tables_and_constants() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(&["analytic", "--alpha", "1", "--m", "1", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0);
    let theory = read(dir.path().join("a/dk_theory.csv"));
    assert!(theory.starts_with("k,d_k\n1,0.666666666667\n"));
    assert_eq!(csv_rows(&theory).len(), 1000);
    let edges = read(dir.path().join("a/edges_expected.csv"));
    assert!(edges.starts_with("t,E_e,eta\n2,2,0\n"));

    let o = hardcopy(&["analytic", "--alpha", "0.9", "--m", "1", "--out", "b", "--eps0", "0.1"], dir.path());
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("mu=1.125\n"), "{stdout}");
    assert!(stdout.contains("exponent=2.8\n"));
    assert!(stdout.contains("epsilon0=0.1\n"));
    assert!(stdout.contains("epsilon1=0.05\n"));
}

#[test]
fn oracle_matches_hand_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(&["oracle", "--alpha", "0.9", "--m", "1", "--steps", "3", "--out", "o"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "E_e=3.1\n");
    let exact = read(dir.path().join("o/exact.csv"));
    assert!(exact.starts_with("k,E_Dk\n"));
    assert!(exact.lines().any(|l| l == "2,1.1"), "{exact}");
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path().join("o/oracle.json"))).unwrap();
    assert_eq!(doc["results"]["recurrence"]["agrees"], true);
}

#[test]
fn fit_recovers_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let zeta = Zeta::new(2.8).unwrap();
    let mut counts = std::collections::BTreeMap::<u64, u64>::new();
    for _ in 0..200_000 {
        *counts.entry(zeta.sample(&mut rng) as u64).or_default() += 1;
    }
    let mut text = String::from("k,count,fraction\n");
    for (k, c) in &counts {
        text.push_str(&format!("{k},{c},{}\n", *c as f64 / 200_000.0));
    }
    fs::write(dir.path().join("degrees.csv"), text).unwrap();
    let o = hardcopy(&["fit", "--input", "degrees.csv", "--k-min", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gamma = fit["gamma_hat"].as_f64().unwrap();
    assert!((2.75..=2.85).contains(&gamma), "gamma_hat {gamma}");
    assert_eq!(fit["k_min"], 1);
    assert!(fit["ks_distance"].as_f64().unwrap() < 0.01);

    fs::write(dir.path().join("flat.csv"), "k,count,fraction\n12,50,1\n").unwrap();
    assert_eq!(code(&hardcopy(&["fit", "--input", "flat.csv"], dir.path())), 2);
}

#[test]
fn compare_with_theory_as_empirical_gives_zero_z() {
    let dir = tempfile::tempdir().unwrap();
    let theory = hardcopy::analytic::limit_degree_sequence(0.9, 1, 20).unwrap();
    let mut fixture = String::from("k,mean,stderr\n");
    for (k, d) in theory.iter() {
        // Shortest round-trip representation, so the parsed value is exact.
        fixture.push_str(&format!("{k},{d},0.001\n"));
    }
    fs::write(dir.path().join("fixture.csv"), fixture).unwrap();
    let o = hardcopy(
        &["compare", "--alpha", "0.9", "--m", "1", "--steps", "100000", "--empirical", "fixture.csv", "--out", "c"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(dir.path().join("c/compare.csv"));
    assert!(table.starts_with("k,empirical,theory,stderr,z\n"));
    let rows = csv_rows(&table);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[4] == "0"), "{table}");
    assert!(String::from_utf8(o.stdout).unwrap().contains("max_abs_diff=0\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), r#"{"alpha": 0.8, "m": 1, "steps": 500, "seed": 5, "out": "cfg"}"#).unwrap();
    let o = hardcopy(&["simulate", "--config", "run.json", "--alpha", "0.9"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path().join("cfg/summary.json"))).unwrap();
    assert_eq!(summary["params"]["alpha"], 0.9);
    assert_eq!(summary["params"]["steps"], 500);
    assert_eq!(summary["params"]["seed"], 5);

    fs::write(dir.path().join("bad.json"), r#"{"alpah": 0.8}"#).unwrap();
    let o = hardcopy(&["simulate", "--config", "bad.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
}

#[test]
fn kumar_model_writes_in_degree_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardcopy(
        &["simulate", "--model", "kumar", "--copy-factor", "0.5", "--out-degree", "2", "--steps", "5000", "--out", "k"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&read(dir.path().join("k/degrees.csv")));
    let total: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    let in_sum: u64 = rows.iter().map(|r| r[0].parse::<u64>().unwrap() * r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 5000);
    assert_eq!(in_sum, 2 * 5000);
    let o =
        hardcopy(&["simulate", "--model", "kumar", "--copy-factor", "1.5", "--steps", "50", "--out", "k2"], dir.path());
    assert_eq!(code(&o), 2);
}
