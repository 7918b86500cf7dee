//! End-to-end runs of the `jdpinn` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jdpinn_core::neural::{format_weights, init_params, Activation, NetworkArchitecture};
use jdpinn_core::simulate::rng::derive_seed;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/btc.params")
}

fn run(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jdpinn"))
        .args(args)
        .current_dir(dir)
        .env_clear()
        .envs(env.iter().copied())
        .output()
        .expect("run jdpinn")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_series(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let d0 = chrono::NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let mut text = String::from("date,close\n");
    for (i, v) in values.iter().enumerate() {
        text.push_str(&format!("{},{v}\n", d0 + chrono::Days::new(i as u64)));
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn help_and_usage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["--help"], dir.path(), &[])), 0);
    assert_eq!(code(&run(&["price", "--help"], dir.path(), &[])), 0);
    assert_eq!(code(&run(&["frobnicate"], dir.path(), &[])), 1);
    assert_eq!(code(&run(&["price", "--fd"], dir.path(), &[])), 1);
    let p = fixture();
    let threads = run(
        &[
            "price",
            "--params",
            p.to_str().unwrap(),
            "--fd",
            "--spot",
            "1",
            "--threads",
            "0",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&threads), 1);
}

#[test]
fn missing_params_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["price", "--params", "nope.params", "--fd", "--spot", "1"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.params"));
}

#[test]
fn unknown_param_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture()).unwrap() + "volatility = 0.3\n";
    std::fs::write(dir.path().join("bad.params"), text).unwrap();
    let out = run(
        &["price", "--params", "bad.params", "--fd", "--spot", "1"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key 'volatility'"));
}

#[test]
fn zero_spot_prices_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let out = run(
        &[
            "price",
            "--params",
            p.to_str().unwrap(),
            "--fd",
            "--fd-grid",
            "100x100",
            "--spot",
            "0",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("value=0.00"), "{}", stdout(&out));
}

#[test]
fn environment_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let env = [
        ("JDPINN_PARAMS", p.to_str().unwrap()),
        ("JDPINN_SPOT", "63577"),
        ("JDPINN_FD_GRID", "100x100"),
    ];
    let out = run(&["price", "--fd"], dir.path(), &env);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("value=33577.00"), "{}", stdout(&out));
}

#[test]
fn zero_rate_training_keeps_initial_weights() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let out = run(
        &[
            "train",
            "--params",
            p.to_str().unwrap(),
            "--layers",
            "2-5-3-1",
            "--iters",
            "1",
            "--lr",
            "0",
            "--seed",
            "9",
            "--out-weights",
            "w.txt",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let arch = NetworkArchitecture::new(vec![2, 5, 3, 1], Activation::Sigmoid).unwrap();
    let expected = format_weights(&arch, &init_params(&arch, derive_seed(9, 2)));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("w.txt")).unwrap(),
        expected
    );
}

#[test]
fn untrained_network_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let p = p.to_str().unwrap();
    let train = run(
        &[
            "train",
            "--params",
            p,
            "--layers",
            "2-4-1",
            "--iters",
            "1",
            "--out-weights",
            "w.txt",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&train), 0);
    let out = run(
        &[
            "validate",
            "--params",
            p,
            "--grid",
            "200x200",
            "--paths",
            "2000",
            "--steps",
            "50",
            "--weights",
            "w.txt",
            "--out",
            "checks.csv",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 4);
    let table = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(
        table
            .lines()
            .any(|l| l.starts_with("pinn-mae") && l.ends_with("FAIL")),
        "{table}"
    );
}

#[test]
fn estimate_without_trend_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let prices: Vec<f64> = (0..50)
        .map(|i| 100.0 * (1.0 + 0.01 * (i % 7) as f64))
        .collect();
    write_series(dir.path(), "px.csv", &prices);
    let out = run(
        &["estimate", "--prices", "px.csv", "--out", "m.params"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 2);
    let text = std::fs::read_to_string(dir.path().join("m.params")).unwrap();
    assert!(text.contains("lambda = ") && !text.contains("mu_p"));
}

#[test]
fn constant_prices_have_no_jumps() {
    let dir = tempfile::tempdir().unwrap();
    write_series(dir.path(), "px.csv", &[250.0; 40]);
    let trend: Vec<f64> = (0..40).map(|i| 40.0 + (i % 5) as f64).collect();
    write_series(dir.path(), "trend.csv", &trend);
    let out = run(
        &[
            "estimate",
            "--prices",
            "px.csv",
            "--trend",
            "trend.csv",
            "--out",
            "m.params",
            "--strike",
            "200",
            "--s-max",
            "500",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("m.params")).unwrap();
    assert!(text.lines().any(|l| l == "lambda = 0.0"), "{text}");
    assert!(text.lines().any(|l| l == "sigma_d = 0.0"), "{text}");
}

#[test]
fn delay_past_maturity_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let out = run(
        &[
            "delay-sweep",
            "--params",
            p.to_str().unwrap(),
            "--taus",
            "1,5",
            "--tau-unit",
            "years",
            "--spot",
            "30000",
            "--fd-grid",
            "50x50",
        ],
        dir.path(),
        &[],
    );
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("maturity"));
}

#[test]
fn runs_leave_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture();
    let out = run(
        &[
            "compare",
            "--params",
            p.to_str().unwrap(),
            "--fd-grid",
            "50x50",
            "--out",
            "cmp.csv",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0);
    let manifest = std::fs::read_to_string(dir.path().join("cmp.csv.manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["command"], "compare");
    assert_eq!(json["exit_code"], 0);
}
