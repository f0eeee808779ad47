use std::path::Path;
use std::process::{Command, Output};

use betlab::cli::output::{checkpoints_csv, fmt_f64};
use betlab::simlab::{run_ensemble, DistSpec, ExperimentConfig};
use betlab::strategies::Strategy;

fn betlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betlab"))
        .args(args)
        .env_remove("BETLAB_WORKERS")
        .output()
        .expect("spawn betlab")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn small_config(paths: u64) -> ExperimentConfig {
    ExperimentConfig {
        dist: DistSpec::Bernoulli { p: 0.5 },
        null_m: 0.5,
        strategy: Strategy::kt_pseudo_count(0.25),
        horizon: 2000,
        paths,
        checkpoints: vec![10, 100, 1000, 2000],
        master_seed: 42,
        track_klinf: true,
    }
}

fn write_config(dir: &Path, c: &ExperimentConfig) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(c).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn missing_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = betlab(&["simulate", "--config", "/nonexistent/c.json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.json");
    std::fs::write(&p, r#"{"dist": {"kind": "bernoulli", "p": 0.5}}"#).unwrap();
    let o = betlab(&["simulate", "--config", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_paths_gives_empty_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config(0));
    let out = tmp.path().join("out");
    let o = betlab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "checkpoints.csv");
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("checkpoint,q01,q05,q25,q50,q75,q95,q99,bankrupt_frac_1e2,bankrupt_frac_1e6,mean_sqrtn_lambda,var_sqrtn_lambda,tn_mean,sos_q50"));
    assert!(out.join("manifest.json").exists() && out.join("summary.json").exists());
}

#[test]
fn simulate_matches_the_library_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(24);
    let cfg = write_config(tmp.path(), &config);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let o = betlab(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap(), "--workers", workers]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = read(&a, "checkpoints.csv");
    assert_eq!(csv, read(&b, "checkpoints.csv"));
    assert_eq!(read(&a, "summary.json"), read(&b, "summary.json"));
    let direct = run_ensemble(&config, 1).unwrap();
    assert_eq!(csv, checkpoints_csv(&direct));

    let manifest: serde_json::Value = serde_json::from_str(&read(&a, "manifest.json")).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed, config);
    assert_eq!(checkpoints_csv(&run_ensemble(&echoed, 2).unwrap()), csv);
}

#[test]
fn workers_default_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = Command::new(env!("CARGO_BIN_EXE_betlab"))
        .args(["bankruptcy", "--paths", "4", "--horizon", "300", "--out", out.to_str().unwrap()])
        .env("BETLAB_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_betlab"))
        .args(["bankruptcy", "--paths", "4", "--horizon", "300", "--out", out.to_str().unwrap()])
        .env("BETLAB_WORKERS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_strategy_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = betlab(&["bankruptcy", "--strategy", "martingale", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = betlab(&["bankruptcy", "--strategy", "kt:0.1", "--paths", "1", "--horizon", "5", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "C below m(1 − m) must be rejected");
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = betlab(&["bankruptcy", "--paths", "2", "--horizon", "50", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn klinf_emits_ks_field() {
    let tmp = tempfile::tempdir().unwrap();
    let o = betlab(&["klinf", "--paths", "200", "--horizon", "1000", "--seed", "3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_str(&read(tmp.path(), "summary.json")).unwrap();
    let ks = s["ks_chi2"].as_f64().unwrap();
    assert!(ks > 0.0 && ks < 0.2);
    let csv = read(tmp.path(), "klinf.csv");
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn leverage_identity_column() {
    let tmp = tempfile::tempdir().unwrap();
    let o = betlab(&["leverage", "--rho", "0.5", "--strategy", "beta-up:0.5", "--paths", "20", "--horizon", "500", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "leverage.csv");
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "max_rel_dev").unwrap();
    let pnb = header.iter().position(|&h| h == "pnb").unwrap();
    let mut rows = 0;
    for l in lines {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells[pnb], "1");
        assert!(cells[col].parse::<f64>().unwrap() <= 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 20);
}

#[test]
fn confseq_and_subg_write_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("c");
    let o = betlab(&["confseq", "--paths", "3", "--horizon", "400", "--grid-step", "0.01", "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&c, "confseq.csv").lines().count(), 1 + 3 * 3);
    let s = tmp.path().join("s");
    let o = betlab(&["subg", "--rule", "plugin-sqrt", "--m", "0", "--paths", "3", "--horizon", "100", "--out", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&s, "subg.csv").lines().count(), 1 + 3 * 2);
    let o = betlab(&["confseq", "--alpha", "1.5", "--paths", "1", "--horizon", "10", "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_floats_round_trip() {
    for v in [0.1, 1e-300, 123456.789, -2.5e-7] {
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
