use std::path::PathBuf;

use qdeco_cli::{round_sig, run, Outcome};
use serde_json::Value;

fn qdeco(args: &[&str]) -> Outcome {
    run(std::iter::once("qdeco").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let out = qdeco(args);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qdeco-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn coherence_length_report() {
    let v = json(&["field", "coherence-length", "--efield-v-per-cm", "1e7"]);
    let l = v["outputs"]["length_cm"].as_f64().unwrap();
    assert!((l - 5.453501325387716e-4).abs() < 1e-14);
    assert_eq!(v["command"], "field coherence-length");
    assert_eq!(v["inputs"]["threshold"], 1.0);
    assert_eq!(v["provenance"]["tool"], "qdeco");
}

#[test]
fn thermal_datum() {
    let v = json(&["thermal", "length", "--time-s", "1"]);
    assert_eq!(v["outputs"]["length_cm"].as_f64().unwrap(), 0.1);
    let v = json(&["thermal", "length", "--time-s", "4", "--lambda-cm2s", "25"]);
    assert_eq!(v["outputs"]["length_cm"].as_f64().unwrap(), 0.1);
}

#[test]
fn superselect_report() {
    let v = json(&[
        "lattice",
        "superselect",
        "--sites",
        "2",
        "--emax",
        "1",
        "--left-field",
        "0",
    ]);
    let out = &v["outputs"];
    assert_eq!(out["physical_dim"], 7);
    assert!(out["max_cross"].as_f64().unwrap() <= 1e-12);
    assert_eq!(out["superselected"], true);
    assert_eq!(out["sector_sizes"]["-1"], 2);
    assert_eq!(out["sector_sizes"]["0"], 3);
    assert_eq!(out["sector_sizes"]["1"], 2);
    assert!(out["contrast"]["max_cross"].as_f64().unwrap() > 0.1);
}

#[test]
fn negative_left_field_parses() {
    let v = json(&[
        "lattice",
        "superselect",
        "--sites",
        "1",
        "--emax",
        "1",
        "--left-field",
        "-1",
    ]);
    assert_eq!(v["inputs"]["left_field"], -1);
    assert_eq!(v["outputs"]["physical_dim"], 2);
}

#[test]
fn identity_check_report() {
    let v = json(&[
        "lattice",
        "identity-check",
        "--sites",
        "2",
        "--emax",
        "1",
        "--seed",
        "3",
    ]);
    assert_eq!(v["outputs"]["passed"], true);
    assert_eq!(v["outputs"]["samples"], 50);
    assert_eq!(v["provenance"]["seed"], 3);
}

#[test]
fn field_factor_and_validity() {
    let v = json(&[
        "field",
        "factor",
        "--volume-cm3",
        "0",
        "--efield-v-per-cm",
        "1e7",
    ]);
    assert_eq!(v["outputs"]["factor"], 1.0);
    let v = json(&["field", "validity-time", "--efield-v-per-cm", "1e7"]);
    let t = v["outputs"]["t_min_s"].as_f64().unwrap();
    assert!((t - 1.704508857637936e-12).abs() < 1e-23);
}

#[test]
fn tripartite_report() {
    let v = json(&["tripartite", "--coeffs", "0.6,0.8", "--env-overlap", "0"]);
    let w = v["outputs"]["branch_weights"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 0.36).abs() < 1e-12);
    assert!(v["outputs"]["max_offdiagonal"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn dephasing_csv_round_trips() {
    let out = qdeco(&[
        "dephasing",
        "--spins",
        "6",
        "--coupling",
        "0.3,0.5,0.7,0.9,1.1,1.3",
        "--t-max",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.ends_with('\n'));
    let mut reader = csv::Reader::from_reader(out.stdout.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["t", "coherence", "coherence_closed_form", "entropy_nats"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    // same numbers through the JSON table, already at 12 digits
    let v = json(&[
        "dephasing",
        "--spins",
        "6",
        "--coupling",
        "0.3,0.5,0.7,0.9,1.1,1.3",
        "--t-max",
        "5",
    ]);
    let table = v["table"]["rows"].as_array().unwrap();
    for (row, jrow) in rows.iter().zip(table) {
        for (x, y) in row.iter().zip(jrow.as_array().unwrap()) {
            let y = y.as_f64().unwrap();
            assert_eq!(*x, y);
            assert_eq!(round_sig(*x), *x);
        }
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &[
            "lattice",
            "identity-check",
            "--sites",
            "2",
            "--emax",
            "2",
            "--seed",
            "11",
        ][..],
        &[
            "dephasing",
            "--spins",
            "4",
            "--coupling",
            "0.4",
            "--t-max",
            "3",
            "--steps",
            "20",
        ][..],
        &["lattice", "superselect", "--sites", "2", "--emax", "1"][..],
    ] {
        assert_eq!(qdeco(args), qdeco(args));
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["nonsense"][..],
        &[
            "field",
            "coherence-length",
            "--efield-v-per-cm",
            "1e7",
            "--bogus",
            "1",
        ][..],
        &["field", "coherence-length"][..],
        &["thermal", "length", "--time-s", "abc"][..],
        &["thermal", "length", "--time-s", "1", "--format", "xml"][..],
        &[][..],
    ] {
        let out = qdeco(args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["field", "coherence-length", "--efield-v-per-cm", "0"][..],
        &["thermal", "length", "--time-s", "-1"][..],
        &[
            "field",
            "factor",
            "--volume-cm3",
            "-1",
            "--efield-v-per-cm",
            "1",
        ][..],
        &["tripartite", "--coeffs", "1,1", "--env-overlap", "0"][..],
        &[
            "dephasing",
            "--spins",
            "3",
            "--coupling",
            "0.1,0.2",
            "--t-max",
            "1",
        ][..],
        &["lattice", "superselect", "--sites", "3", "--emax", "1"][..],
    ] {
        let out = qdeco(args);
        assert_eq!(out.code, 1, "{args:?}: {}", out.stderr);
        assert!(out.stderr.starts_with("error:"));
    }
}

#[test]
fn help_exits_zero() {
    let out = qdeco(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("lattice"));
}

#[test]
fn config_file_with_command_line_override() {
    let path = scratch("thermal.toml");
    std::fs::write(&path, "time_s = 4.0\nlambda_cm2s = 100\n").unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["thermal", "length", "--config", p]);
    assert_eq!(v["outputs"]["length_cm"].as_f64().unwrap(), 0.05);
    let v = json(&["thermal", "length", "--config", p, "--time-s", "1"]);
    assert_eq!(v["outputs"]["length_cm"].as_f64().unwrap(), 0.1);

    let lists = scratch("dephasing.toml");
    std::fs::write(
        &lists,
        "spins = 2\ncoupling = [0.5, 0.25]\nt_max = 1.0\nsteps = 5\n",
    )
    .unwrap();
    let v = json(&["dephasing", "--config", lists.to_str().unwrap()]);
    assert_eq!(v["outputs"]["points"], 5);
}

#[test]
fn config_rejects_unknown_keys() {
    let path = scratch("bad.toml");
    std::fs::write(&path, "time_s = 1.0\nspins = 3\n").unwrap();
    let out = qdeco(&["thermal", "length", "--config", path.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("unknown key 'spins'"));
    let dashed = scratch("dashed.toml");
    std::fs::write(&dashed, "\"time-s\" = 1.0\n").unwrap();
    assert_eq!(
        qdeco(&["thermal", "length", "--config", dashed.to_str().unwrap()]).code,
        2
    );
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("report.json");
    let out = qdeco(&[
        "thermal",
        "length",
        "--time-s",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, qdeco(&["thermal", "length", "--time-s", "1"]).stdout);
}
