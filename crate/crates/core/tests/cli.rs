use std::process::{Command, Output};

use randfid::cli::{matrices_from_record, OutputRecord};
use randfid::state::validate_state;
use serde_json::Value;

fn randfid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randfid")).args(args).env_remove("FID_THREADS").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn mean_values(v: &Value) -> Vec<f64> {
    v["results"]["rows"].as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(randfid(&["sample", "--measure", "induced", "--n-dim", "2", "--k-dim", "0"]).status.code(), Some(2));
    assert_eq!(randfid(&["mean", "--n-dim", "2", "--k-dim", "x"]).status.code(), Some(2));
    assert_eq!(randfid(&["bogus"]).status.code(), Some(2));
    assert_eq!(randfid(&["gauge", "--n-dim", "2", "--k-dim", "2", "--f-tilde", "1.5"]).status.code(), Some(2));
    assert_eq!(randfid(&["dist", "--family", "sym-nk", "--n-dim", "4", "--k-dim", "2"]).status.code(), Some(2));
}

#[test]
fn sample_round_trip() {
    let dir = std::env::temp_dir().join(format!("randfid-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hs.json");
    let out = randfid(&["sample", "--measure", "hs", "--n-dim", "2", "--count", "3", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rec: OutputRecord = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rec.schema_version, "1");
    let states = matrices_from_record(&rec).unwrap();
    assert_eq!(states.len(), 3);
    for s in &states {
        validate_state(s.matrix()).unwrap();
    }
    let again = randfid(&["sample", "--measure", "hs", "--n-dim", "2", "--count", "3", "--seed", "4"]);
    let rec2: OutputRecord = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(rec.results, rec2.results);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bures_samples_are_full_rank() {
    let v = json_of(&randfid(&["sample", "--measure", "bures", "--n-dim", "3", "--count", "2"]));
    let rec: OutputRecord = serde_json::from_value(v).unwrap();
    for s in matrices_from_record(&rec).unwrap() {
        assert_eq!(s.rank(1e-12), 3);
    }
}

#[test]
fn mean_closed_forms() {
    let v = json_of(&randfid(&["mean", "--n-dim", "2", "--k-dim", "2", "--method", "closed"]));
    let exact = 0.5 + 9.0 * std::f64::consts::PI.powi(2) / 512.0;
    assert!((mean_values(&v)[0] - exact).abs() < 1e-12);
    let v = json_of(&randfid(&["mean", "--n-dim", "3", "--k-dim", "1", "--method", "closed", "--statistic", "sqrtf"]));
    assert!((mean_values(&v)[0] - 8.0 / 15.0).abs() < 1e-12);
}

#[test]
fn mean_mc_agrees_with_closed() {
    let v = json_of(&randfid(&["mean", "--n-dim", "2", "--k-dim", "2", "--method", "all", "--samples", "100000", "--seed", "3"]));
    let rows = v["results"]["rows"].as_array().unwrap();
    let closed = rows[0]["value"].as_f64().unwrap();
    let mc = rows.iter().find(|r| r["provenance"] == "monte-carlo").unwrap();
    let z = (mc["value"].as_f64().unwrap() - closed) / mc["error"].as_f64().unwrap();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn mean_csv_ranges() {
    let out = randfid(&["mean", "--n-dim", "2..4", "--k-dim", "1,2", "--method", "series", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn dist_pure_pure_qubit_is_flat() {
    let out = randfid(&["dist", "--family", "pure-pure", "--n-dim", "2", "--grid", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let pdf: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((pdf - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dist_sym_2k_closed_form() {
    let v = json_of(&randfid(&["dist", "--family", "sym-2k", "--k-dim", "1.5", "--grid", "4", "--format", "json"]));
    let curve = &v["results"]["curve"];
    let f: Vec<f64> = serde_json::from_value(curve["f"].clone()).unwrap();
    let pdf: Vec<f64> = serde_json::from_value(curve["pdf"].clone()).unwrap();
    assert_eq!(f, vec![0.125, 0.375, 0.625, 0.875]);
    assert!(pdf.iter().all(|p| p.is_finite() && *p > 0.0));
    assert!((pdf[1] - randfid::analytic::pdf_fidelity_2k_closed(0.375, 1.5).unwrap()).abs() < 1e-12);
}

#[test]
fn dist_overlay_reports_ks() {
    let out = randfid(&["dist", "--family", "pure-hs", "--n-dim", "3", "--grid", "20", "--mc-overlay", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("ks: D ="));
    let head = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head, "F,pdf,hist,hist_err");
}

#[test]
fn gauge_output_is_in_range() {
    let v = json_of(&randfid(&["gauge", "--n-dim", "2", "--k-dim", "2", "--f-tilde", "0.75"]));
    let a = v["results"]["alpha"].as_f64().unwrap();
    assert!(a.is_finite());
    assert_eq!(v["command"], "gauge");
}

#[test]
fn verify_fails_with_zero_tolerance() {
    let out = randfid(&["verify", "--tol-scale", "0"]);
    assert_eq!(out.status.code(), Some(4));
}
