use std::process::{Command, Output};

use serde_json::Value;

fn xxchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xxchain")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = xxchain(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn energy_table() {
    let doc = json(&["energy", "--n", "8", "--j", "1", "--b", "0.6", "--r", "0..4"]);
    assert_eq!(doc["schemaVersion"], "1");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["r"], 0);
    assert!((rows[0]["energy"].as_f64().unwrap() + 4.8).abs() < 1e-12);
    assert_eq!(rows[0]["precision"], "binary64");
    assert!(rows[0]["tolerance"].is_number());

    let doc = json(&["energy", "--n", "4", "--b", "0", "--r", "2"]);
    let e = doc["rows"][0]["energy"].as_f64().unwrap();
    assert!((e + std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["energy", "--n", "8", "--b", "0.6", "--r", "5"][..],
        &["energy", "--n", "8"],
        &["energy", "--n", "1", "--b", "0.1"],
        &["energy", "--n", "8", "--j", "-1", "--b", "0.1"],
        &["energy", "--n", "8", "--b", "-0.1"],
        &["schmidt", "--n", "8", "--m", "8"],
        &["schmidt", "--n", "8", "--tol", "2"],
        &["energy", "--n", "8", "--b-range", "0,1"],
        &["state", "--n", "6"],
        &["state", "--n", "6", "--r", "1..2"],
        &["verify", "--n", "30"],
        &["phase-diagram"],
    ] {
        let out = xxchain(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn phase_diagram_fields() {
    let doc = json(&["phase-diagram", "--n", "2", "--j", "1"]);
    let fields = doc["criticalFields"].as_array().unwrap();
    assert_eq!(fields.len(), 1);
    assert_eq!(fields[0]["field"].as_f64().unwrap(), 0.5);

    let doc = json(&["phase-diagram", "--n", "8"]);
    let fields: Vec<f64> =
        doc["criticalFields"].as_array().unwrap().iter().map(|f| f["field"].as_f64().unwrap()).collect();
    assert_eq!(fields.len(), 4);
    assert_eq!(fields[0], 0.5);
    assert!(fields.windows(2).all(|w| w[0] > w[1]));
    assert!(doc["criticalFields"].as_array().unwrap().iter().all(|f| f["derivativeJump"] == 2.0));

    let doc = json(&["phase-diagram", "--n", "5"]);
    assert_eq!(doc["criticalFields"].as_array().unwrap().len(), 2);
}

#[test]
fn phase_diagram_csv_is_plot_ready() {
    let out = xxchain(&["phase-diagram", "--n", "6", "--b-range", "0,0.6,7", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "B,E_min,dE/dB,r,degenerate,tolerance,precision");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][3], "3");
    assert_eq!(rows[6][3], "0");
    assert_eq!(rows[6][2], "-6.0");
}

#[test]
fn auto_grid_avoids_crossings() {
    let doc = json(&["energy", "--n", "7", "--auto-grid"]);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4 * 4);
    // exactly one ground sector at each midpoint
    for chunk in rows.chunks(4) {
        assert_eq!(chunk.iter().filter(|r| r["ground"] == true).count(), 1);
    }
}

#[test]
fn schmidt_reports() {
    let doc = json(&["schmidt", "--n", "10", "--m", "5", "--r", "3"]);
    let rep = &doc["reports"][0];
    assert_eq!(rep["totalRank"], 8);
    assert_eq!(rep["blockRanks"], serde_json::json!([1, 3, 3, 1]));
    assert!(rep["blocks"][1]["gap"].as_f64().unwrap() > 1e3);

    let doc = json(&["schmidt", "--n", "6", "--m", "3", "--r", "0"]);
    assert_eq!(doc["reports"][0]["totalRank"], 1);
    let doc = json(&["schmidt", "--n", "12", "--r", "4"]);
    assert_eq!(doc["reports"][0]["totalRank"], 16);
}

#[test]
fn classify_headline() {
    let doc = json(&["classify", "--n", "8"]);
    let t = doc["transitions"].as_array().unwrap();
    let pairs: Vec<(u64, u64)> =
        t.iter().map(|x| (x["rankAbove"].as_u64().unwrap(), x["rankBelow"].as_u64().unwrap())).collect();
    assert_eq!(pairs, vec![(1, 2), (2, 4), (4, 8), (8, 16)]);
    assert!(t.iter().all(|x| x["verdict"] == "INEQUIVALENT"));

    let doc = json(&["classify", "--n", "2"]);
    assert_eq!(doc["transitions"].as_array().unwrap().len(), 1);
    assert_eq!(doc["transitions"][0]["rankBelow"], 2);

    let doc = json(&["classify", "--n", "5"]);
    let t = doc["transitions"].as_array().unwrap();
    let pairs: Vec<(u64, u64)> =
        t.iter().map(|x| (x["rankAbove"].as_u64().unwrap(), x["rankBelow"].as_u64().unwrap())).collect();
    assert_eq!(pairs, vec![(1, 2), (2, 4)]);
}

#[test]
fn verify_passes_at_n8() {
    let out = xxchain(&["verify", "--n", "8", "--j", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    let checks = doc["checks"].as_array().unwrap();
    for kind in ["energy", "overlap", "denseRank", "recurrence"] {
        assert!(checks.iter().any(|c| c["check"] == kind), "{kind}");
    }
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn loose_tolerance_is_escalated_and_reported() {
    // a threshold this loose discards genuine singular values in binary64;
    // the collapsed gap triggers the extended-precision retry, and the
    // report says which precision decided each rank
    let out = xxchain(&["verify", "--n", "10", "--tol", "0.99", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let ranks: Vec<&str> = text.lines().filter(|l| l.starts_with("denseRank")).collect();
    assert_eq!(ranks.len(), 6);
    assert!(ranks[1..].iter().all(|l| l.ends_with(",0.99,extended,pass")), "{ranks:?}");
}

#[test]
fn state_serialization() {
    let doc = json(&["state", "--n", "3", "--r", "1"]);
    assert_eq!(doc["N"], 3);
    assert_eq!(doc["r"], 1);
    let c = doc["normConstant"].as_f64().unwrap();
    assert!((c - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for (k, e) in entries.iter().enumerate() {
        assert_eq!(e[0], k as u64 + 1);
        assert_eq!(e[1].as_f64().unwrap(), 1.0);
    }
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    for args in [
        &["classify", "--n", "12"][..],
        &["energy", "--n", "9", "--b-range", "0,0.7,15", "--format", "csv"],
        &["verify", "--n", "6"],
    ] {
        let a = xxchain(args);
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", "3"]);
        let b = xxchain(&with_threads);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, xxchain(args).stdout);
    }
}

#[test]
fn writes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fields.csv");
    let p = path.to_str().unwrap();
    let out = xxchain(&["phase-diagram", "--n", "4", "--format", "csv", "--output", p]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("B,E_min,dE/dB,r"));
    assert_eq!(text.lines().count(), 102);
}
