use std::collections::HashMap;
use std::fs;
use std::process::Command;

use equicorr::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("equicorr").chain(args.iter().copied()).map(std::ffi::OsString::from);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn kv(out: &str) -> HashMap<String, String> {
    out.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(out: &str, key: &str) -> f64 {
    kv(out)[key].parse().unwrap()
}

#[test]
fn kstar_value() {
    let (code, out, _) = call(&["kstar", "--p", "0.5", "--r", "0.5"]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "k_star") - 1.6142).abs() < 1e-3);
    assert!(num(&out, "residual") < 1e-10);
}

#[test]
fn tau2_value() {
    let (code, out, _) = call(&["tau2", "--n", "100", "--rho", "0", "--p", "0.5", "--r", "0.5"]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "tau2") - 12.816961).abs() < 1e-5, "{out}");
}

#[test]
fn fpp_asymptotic_modes() {
    let (code, out, _) = call(&["fpp-asymptotic", "--mode", "adaptive", "--n", "1000", "--p", "0.5", "--r", "0.5"]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "fpp") - 0.012852).abs() < 1e-6);
    for mode in [&["--mode", "type2"][..], &["--mode", "fixed", "--tau2", "1"]] {
        let mut args = vec!["fpp-asymptotic", "--n", "1000", "--p", "0.5", "--r", "0.5"];
        args.extend_from_slice(mode);
        let (code, out, _) = call(&args);
        assert_eq!(code, EXIT_OK, "{mode:?}");
        assert!(num(&out, "fpp") > 0.0 && num(&out, "fpp") < 1.0);
    }
}

#[test]
fn threshold_round_trip() {
    let (code, out, _) = call(&["threshold", "--fpp", "0.05", "--r", "0.5", "--n", "1000", "--verify"]);
    assert_eq!(code, EXIT_OK);
    let p = num(&out, "p");
    assert!(p > 0.0 && p < 1.0);
    assert!((num(&out, "fpp_at_p") - 0.05).abs() < 1e-9);
}

#[test]
fn critical_values() {
    let (code, out, _) = call(&["critical-value", "--method", "adhoc", "--alpha", "0.05", "--n", "10", "--rho", "0.9999"]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "c") - 1.959964).abs() < 0.02);
    let (code, out, _) = call(&[
        "critical-value", "--method", "lrt", "--alpha", "0.05", "--n", "1", "--rho", "0", "--reps", "20000", "--seed", "1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "c") - 3.8415).abs() < 0.2, "{out}");
}

#[test]
fn posterior_inline_and_file() {
    let (code, out, _) = call(&["posterior", "--x", "1,-0.5", "--rho", "0.5", "--tau2", "1", "--verify"]);
    assert_eq!(code, EXIT_OK);
    let sum: f64 = ["P0", "P1", "P2"].iter().map(|k| num(&out, k)).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(num(&out, "verify_max_abs_diff") < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    fs::write(&path, "1\n-0.5\n").unwrap();
    let (code, again, _) = call(&["posterior", "--x-file", path.to_str().unwrap(), "--rho", "0.5", "--tau2", "1", "--verify"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, again);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["kstar", "--p", "2", "--r", "0.5"][..],
        &["bogus"],
        &["posterior", "--x", "1,2,3", "--n", "2", "--rho", "0.1", "--tau2", "1"],
        &["tau2", "--n", "100"],
        &["critical-value", "--method", "adhoc", "--alpha", "0.05", "--n", "10", "--rho", "1.5"],
    ] {
        let (code, _, err) = call(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn numerical_failure_exits_three() {
    let (code, _, err) = call(&["critical-value", "--method", "adhoc", "--alpha", "1e-300", "--n", "10", "--rho", "0.5"]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("numerical"), "{err}");
}

#[test]
fn config_file_defaults_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tau.cfg");
    fs::write(&path, "# adaptive slab\nn = 100\nrho = 0\np = 0.5\nr = 0.5\n").unwrap();
    let cfg = path.to_str().unwrap();
    let (code, out, _) = call(&["tau2", "--config", cfg]);
    assert_eq!(code, EXIT_OK);
    assert!((num(&out, "tau2") - 12.816961).abs() < 1e-5);
    let (_, over, _) = call(&["tau2", "--config", cfg, "--n", "1000"]);
    assert!(num(&over, "tau2") > num(&out, "tau2"));

    fs::write(&path, "n = 100\nbogus = 1\n").unwrap();
    let (code, _, err) = call(&["tau2", "--config", cfg, "--p", "0.5", "--r", "0.5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("bogus"), "{err}");
}

const SIM: &str = "experiment = fpp\nn = 20\nn = 200\nrho = 0.3\ntau_mode = adaptive\nreps = 400\nseed = 17\n";

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fpp.cfg");
    fs::write(&cfg, SIM).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let (code, _, err) = call(&[
            "simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads,
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("experiment,n,rho,"));

    let (_, stdout, _) = call(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout, text);
    let (_, reseeded, _) = call(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "18"]);
    assert_ne!(reseeded, text);
}

#[test]
fn binary_reads_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fpp.cfg");
    fs::write(&cfg, SIM.replace("seed = 17\n", "")).unwrap();
    let bin = env!("CARGO_BIN_EXE_equicorr");
    let go = |seed: &str| {
        let out = Command::new(bin)
            .args(["simulate", "--config", cfg.to_str().unwrap()])
            .env("SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let (a, b, c) = (go("5"), go("5"), go("6"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.lines().nth(1).unwrap().ends_with(",5"));

    let out = Command::new(bin).args(["kstar", "--p", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
