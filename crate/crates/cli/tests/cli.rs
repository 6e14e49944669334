//! End-to-end CLI tests: exit codes, output shapes, reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn dspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspace"))
        .args(args)
        .output()
        .expect("spawn dspace")
}

#[test]
fn sweep_has_requested_rows() {
    let out = dspace(&["set", "--points", "0", "--sweep", "--rows", "17"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,counting,measure"));
    assert_eq!(lines.count(), 17);
}

#[test]
fn sweep_of_single_point_is_linear() {
    let out = dspace(&["set", "--points", "0", "--sweep", "--rows", "8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let t: f64 = cols[0].parse().unwrap();
        let n: u64 = cols[1].parse().unwrap();
        let m: f64 = cols[2].parse().unwrap();
        assert_eq!(n, 2);
        assert!((m - 2.0 * t).abs() < 1e-12 * (1.0 + m));
    }
}

#[test]
fn energy_modulus_reports_unit_series() {
    let out = dspace(&["energy", "--modulus", "abs(1-zeta)", "--grid", "4096"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let series = v["series"]["value"].as_f64().unwrap();
    assert!((series - 1.0).abs() < 1e-9, "series = {series}");
    let carleson = v["carleson"]["value"].as_f64().unwrap();
    assert!((carleson - 1.0).abs() < 2e-3, "carleson = {carleson}");
}

#[test]
fn certify_point_set_exits_zero() {
    let out = dspace(&["certify", "--points", "0"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["conclusion"], "sufficient-conditions-met");
}

#[test]
fn certify_geometric_cantor_exits_not_met() {
    let out = dspace(&["certify", "--cantor", "geometric:lambda=0.3333", "--generation", "12"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["conclusion"], "not-met");
    assert_eq!(v["capcond"]["verdict"], "converges");
}

#[test]
fn usage_errors_exit_one() {
    // No set selector.
    let out = dspace(&["certify"]);
    assert_eq!(out.status.code(), Some(1));
    // Malformed cantor descriptor.
    let out = dspace(&["set", "--cantor", "geometric"]);
    assert_eq!(out.status.code(), Some(1));
    // Invalid spec (lambda >= 1/2) is a descriptor error.
    let out = dspace(&["set", "--cantor", "geometric:lambda=0.6"]);
    assert_eq!(out.status.code(), Some(1));
    // Unknown flag.
    let out = dspace(&["set", "--points", "0", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_three() {
    // A deeply singular modulus with a tiny quadrature budget.
    let out = dspace(&[
        "energy",
        "--modulus",
        "dist^0.3",
        "--cantor",
        "geometric:lambda=0.3333",
        "--generation",
        "8",
        "--endpoints",
        "--tol",
        "1e-7",
        "--max-grid-log2",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn descriptor_file_round_trip(){
    let dir = std::env::temp_dir().join("dspace-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("set.json");
    std::fs::write(
        &path,
        r#"{"kind":"cantor","cantor":{"rule":"double_exp","params":{"c":1.0,"p":0.0},"generation":5}}"#,
    )
    .unwrap();
    let out = dspace(&["set", "--descriptor", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["arcs"], 32);
    assert_eq!(v["capcond_verdict"], "diverges");
    // The echoed descriptor reparses to the same set.
    let echoed = serde_json::to_string(&v["descriptor"]).unwrap();
    let again = dspace(&["set", "--descriptor", &write_temp(&dir, "echo.json", &echoed)]);
    assert!(again.status.success());
}

fn write_temp(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let dir = std::env::temp_dir().join("dspace-cli-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let path = dir.join(format!("cert-{threads}.json"));
        let out = dspace(&[
            "certify",
            "--points",
            "0,1.0471975511965976",
            "--threads",
            threads,
            "--seed",
            "123",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);

    // Same for the randomized fusion suite under a fixed seed.
    let mut fusion_outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.join(format!("fusion-{threads}.json"));
        let out = dspace(&[
            "fusion-test",
            "--instances",
            "6",
            "--seed",
            "99",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        fusion_outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(fusion_outputs[0], fusion_outputs[1]);
}

#[test]
fn regularize_writes_both_dumps() {
    let dir = std::env::temp_dir().join("dspace-cli-reg");
    std::fs::create_dir_all(&dir).unwrap();
    let prefix = dir.join("reg").to_str().unwrap().to_string();
    let out = Command::new(env!("CARGO_BIN_EXE_dspace"))
        .args([
            "regularize",
            "--points",
            "0",
            "--alpha",
            "0.75",
            "--beta",
            "0.875",
            "--grid-log2",
            "12",
            "--out-prefix",
            &prefix,
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let transform = std::fs::read_to_string(format!("{prefix}-transform.csv")).unwrap();
    assert!(transform.starts_with("x,u,u_tilde,in_sun"));
    assert_eq!(transform.lines().count(), 4097);
    let psi = std::fs::read_to_string(format!("{prefix}-psi.csv")).unwrap();
    assert!(psi.starts_with("t,phi,psi,t_beta"));
    // phi(t)=min{2t, t^beta} is already regular here: psi == phi row-wise.
    for line in psi.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - cols[2]).abs() <= 1e-9 * (1.0 + cols[1].abs()));
        assert!(cols[2] <= cols[3] * (1.0 + 1e-9));
    }
}

#[test]
fn certify_csv_has_one_row_per_delta() {
    let dir = std::env::temp_dir().join("dspace-cli-csv");
    std::fs::create_dir_all(&dir).unwrap();
    let json_path = dir.join("report.json");
    let csv_path = dir.join("table.csv");
    let out = dspace(&[
        "certify",
        "--points",
        "0",
        "--out",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let records = report["certificate"]["records"].as_array().unwrap().len();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), records + 1, "header plus one row per delta");
}

#[test]
fn fusion_suite_holds_and_embeds_config() {
    let out = dspace(&["fusion-test", "--instances", "12", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_hold"], true);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["instances"], 12);
    assert!(v["worst_margin"].as_f64().unwrap() > 0.0);
}
