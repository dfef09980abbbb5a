use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kreinlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kreinlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|x| x.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn solve_free_system_matches_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &[
            "solve",
            "--potential",
            "zero",
            "--lambda",
            "2",
            "--rmax",
            "1",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("solve_0.csv"));
    assert_eq!(header, ["r", "ReP", "ImP", "RePstar", "ImPstar", "cumP2"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 2f64.cos()).abs() < 1e-10);
    assert!((last[2] - 2f64.sin()).abs() < 1e-10);
    let manifest = read_json(&dir.path().join("solve.json"));
    assert_eq!(manifest["files"][0]["file"], "solve_0.csv");
    assert!(manifest["tolerance"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_box_is_frozen_past_support() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &[
            "solve",
            "--potential",
            "box:1,1",
            "--lambda",
            "0",
            "--rmax",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let (_, rows) = csv_rows(&dir.path().join("solve_0.csv"));
    assert!((rows.last().unwrap()[3] - (-1f64).exp()).abs() < 1e-8);
}

#[test]
fn solve_writes_one_file_per_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &[
            "solve",
            "--potential",
            "gaussian:1,1",
            "--lambda",
            "0,1+i,-2",
            "--rmax",
            "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    for k in 0..3 {
        assert!(dir.path().join(format!("solve_{k}.csv")).exists());
    }
}

#[test]
fn missing_potential_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["solve", "--lambda", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_potential_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &["solve", "--potential", "box:1", "--lambda", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn entropy_of_zero_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &["entropy", "--potential", "zero", "--rmax", "10"],
        dir.path(),
    );
    assert!(out.status.success());
    let (header, rows) = csv_rows(&dir.path().join("entropy.csv"));
    assert_eq!(header, ["r", "E", "D", "ratio"]);
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    let summary = read_json(&dir.path().join("entropy.json"));
    assert_eq!(summary["verdict"], "trivial");
}

#[test]
fn entropy_gaussian_alphas_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &["entropy", "--potential", "gaussian:1,1", "--rmax", "6"],
        dir.path(),
    );
    assert!(out.status.success());
    let s = read_json(&dir.path().join("entropy.json"));
    let (ae, ad) = (
        s["alpha_e"].as_f64().unwrap(),
        s["alpha_d"].as_f64().unwrap(),
    );
    assert!((ae - ad).abs() <= 0.3, "alpha_e {ae}, alpha_d {ad}");
    assert_eq!(s["verdict"], "within_band");
}

#[test]
fn entropy_figure1_d_fit_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &["entropy", "--potential", "figure1", "--rmax", "8"],
        dir.path(),
    );
    assert!(out.status.success());
    let s = read_json(&dir.path().join("entropy.json"));
    let ad = s["alpha_d"].as_f64().unwrap();
    assert!((ad - 1.0).abs() <= 0.3, "alpha_d {ad}");
}

#[test]
fn opuc_single_alpha_is_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["opuc", "--alphas", "0.5", "--orders"], dir.path());
    assert!(out.status.success());
    let s = read_json(&dir.path().join("opuc.json"));
    assert_eq!(s["orders"]["rho_alpha"]["kind"], "polynomial");
    assert_eq!(s["orders"]["rho_pi"]["kind"], "polynomial");
    let (header, rows) = csv_rows(&dir.path().join("opuc_alphas.csv"));
    assert_eq!(header, ["n", "Re_alpha", "Im_alpha", "lambda_n"]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn opuc_factorial_orders_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(
        &["opuc", "--rule", "factorial:0.5,20", "--orders"],
        dir.path(),
    );
    assert!(out.status.success());
    let s = read_json(&dir.path().join("opuc.json"));
    for key in ["rho_alpha_value", "rho_pi_value"] {
        let v = s["orders"][key].as_f64().unwrap();
        assert!((0.8..=1.2).contains(&v), "{key} = {v}");
    }
}

#[test]
fn opuc_rejects_modulus_one_or_more() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["opuc", "--alphas", "1.2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_only_filters_groups() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["verify", "--only", "cd"], dir.path());
    assert!(out.status.success());
    let report = read_json(&dir.path().join("verify.json"));
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["group"] == "cd"));
    assert!(checks
        .iter()
        .all(|c| c["tolerance"].as_f64().unwrap() > 0.0));
}

#[test]
fn verify_unknown_group_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["verify", "--only", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "verify",
        "--seed",
        "7",
        "--only",
        "series_ode,word_bounds,opuc",
    ];
    assert!(kreinlab(&args, a.path()).status.success());
    assert!(kreinlab(&args, b.path()).status.success());
    let x = std::fs::read(a.path().join("verify.json")).unwrap();
    let y = std::fs::read(b.path().join("verify.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn verify_default_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["verify"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read_json(&dir.path().join("verify.json"))["passed"], true);
}

#[test]
fn figure1_table_shape_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = kreinlab(&["figure1"], dir.path());
    assert!(out.status.success());
    let (header, rows) = csv_rows(&dir.path().join("figure1.csv"));
    assert_eq!(header, ["r", "f", "tail"]);
    assert_eq!(rows.len(), 801);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 1f64.sin()).abs() < 1e-15);
    let r6 = rows.iter().find(|r| (r[0] - 6.0).abs() < 1e-9).unwrap();
    assert!(r6[2].abs() <= 2.0 * (-6f64).exp());
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_kreinlab"))
            .env("KREINLAB_THREADS", threads)
            .args(["figure1", "--out"])
            .arg(dir.path())
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert_eq!(run("zero").status.code(), Some(2));
}
