//! End-to-end tests of the command-line interface: exit codes, envelope
//! contents, file outputs and determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn paulikern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paulikern"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is an envelope")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn verify_symbolic_passes() {
    let out = paulikern(&[
        "verify",
        "--generators",
        "3",
        "--order",
        "4",
        "--mode",
        "symbolic",
    ]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["status"], "ok");
    assert_eq!(env["command"], "verify");
}

#[test]
fn verify_numeric_residuals_within_tolerance() {
    let out = paulikern(&[
        "verify",
        "--generators",
        "3",
        "--order",
        "5",
        "--mode",
        "numeric",
        "--dim",
        "40",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["status"], "ok");
    for r in env["residuals"].as_array().unwrap() {
        let name = r["name"].as_str().unwrap();
        if name.starts_with("expansion_identity") {
            assert!(
                r["value"].as_f64().unwrap() <= 4e-9,
                "{name} exceeds the documented bound"
            );
        }
    }
}

#[test]
fn verify_rejects_zero_generators() {
    let out = paulikern(&[
        "verify",
        "--generators",
        "0",
        "--order",
        "2",
        "--mode",
        "symbolic",
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("--generators"),
        "message names the flag: {stderr}"
    );
}

#[test]
fn spectrum_triple_overlap_matches_gram_values() {
    let out = paulikern(&["spectrum", "--triple-overlap", "0.4", "--dim", "3"]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    let eigenvalues: Vec<f64> = env["results"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected = [0.6, 0.6, 1.8];
    for (got, want) in eigenvalues.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
    assert_eq!(env["results"]["divergent"], false);
}

#[test]
fn spectrum_require_convergent_fails_on_divergent_family() {
    let out = paulikern(&[
        "spectrum",
        "--triple-overlap",
        "0.6",
        "--dim",
        "3",
        "--require-convergent",
    ]);
    assert_eq!(exit_code(&out), 1);
    let env = stdout_json(&out);
    assert_eq!(env["status"], "error");
    assert_eq!(env["results"]["divergent"], true);
}

#[test]
fn spectrum_output_is_deterministic() {
    let args = [
        "spectrum", "--random", "--dim", "12", "--nproj", "3", "--seed", "9",
    ];
    let first = paulikern(&args);
    let second = paulikern(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout, "byte-identical envelopes");
}

fn write_orthogonal_pair(path: &Path) {
    // Two axis projectors in dim 4 as a raw schema document.
    let doc = serde_json::json!({
        "dim": 4,
        "projectors": [
            {"span": [[1.0, 0.0, 0.0, 0.0]]},
            {"span": [[0.0, 1.0, 0.0, 0.0]]}
        ]
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
}

#[test]
fn kernel_of_orthogonal_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    write_orthogonal_pair(&path);
    let out = paulikern(&[
        "kernel",
        "--input",
        path.to_str().unwrap(),
        "--threshold",
        "1e-10",
    ]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["results"]["kernel_dim"], 2);
}

#[test]
fn toy_model_file_roundtrips_through_opp_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let tsv = dir.path().join("sweep.tsv");

    let out = paulikern(&[
        "toy",
        "--nmax",
        "6",
        "--fs",
        "0S",
        "--model-out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);

    let out = paulikern(&["schema", "--input", model.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["results"]["kind"], "toy_model");
    assert_eq!(env["results"]["roundtrip"], true);

    let out = paulikern(&[
        "opp",
        "--input",
        model.to_str().unwrap(),
        "--lambdas",
        "1e1:1e5:8",
        "--levels",
        "2",
        "--tsv",
        tsv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);

    let table = std::fs::read_to_string(&tsv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "lambda\tE_0\tE_1\tgap_0\tgap_1");
    assert_eq!(lines.len(), 9);
    // E_0 column is nondecreasing in the penalty strength.
    let e0: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    for w in e0.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "E_0 decreased: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn opp_with_eps_grid_reports_keep_vs_eliminate() {
    let out = paulikern(&[
        "opp",
        "--toy",
        "--nmax",
        "6",
        "--fs",
        "0S,2S",
        "--lambdas",
        "1e1:1e4:5",
        "--levels",
        "1",
        "--eps",
        "1e-2:8e-1:6",
    ]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    let rows = env["results"]["almost_forbidden"]["rows"]
        .as_array()
        .unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let keep = row["e_keep"].as_f64().unwrap();
        let elim = row["e_elim"].as_f64().unwrap();
        assert!(elim >= keep - 1e-10, "variational ordering violated");
    }
}

#[test]
fn schema_accepts_valid_set_and_rejects_truncated_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    write_orthogonal_pair(&path);
    let out = paulikern(&["schema", "--input", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["results"]["kind"], "projector_set");
    assert_eq!(env["results"]["roundtrip"], true);

    let truncated = dir.path().join("broken.json");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let out = paulikern(&["schema", "--input", truncated.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("byte offset"),
        "diagnostic has offset: {stderr}"
    );
}

#[test]
fn schema_flags_asymmetric_operator() {
    let dir = tempfile::tempdir().unwrap();

    let good = dir.path().join("sym.json");
    let doc = serde_json::json!({
        "dim": 2,
        "entries": [1.0, 0.25, 0.25, 2.0]
    });
    std::fs::write(&good, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = paulikern(&["schema", "--input", good.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let env = stdout_json(&out);
    assert_eq!(env["results"]["kind"], "operator");
    assert_eq!(env["results"]["roundtrip"], true);

    let bad = dir.path().join("op.json");
    let doc = serde_json::json!({
        "dim": 2,
        "entries": [1.0, 0.5, 0.0, 1.0]
    });
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = paulikern(&["schema", "--input", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    let env = stdout_json(&out);
    assert_eq!(env["status"], "error");
    let names: Vec<&str> = env["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"symmetry"));
}

#[test]
fn output_flag_writes_envelope_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    let out = paulikern(&[
        "spectrum",
        "--triple-overlap",
        "0.2",
        "--dim",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "envelope goes to the file");
    let env: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(env["command"], "spectrum");

    // The envelope itself round-trips bit-exactly.
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: paulikern::report::ReportEnvelope = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.to_json_string(), text);
}

#[test]
fn threads_flag_does_not_change_results() {
    let base = paulikern(&[
        "opp",
        "--toy",
        "--nmax",
        "4",
        "--lambdas",
        "1e1:1e4:5",
        "--levels",
        "1",
    ]);
    let threaded = paulikern(&[
        "opp",
        "--toy",
        "--nmax",
        "4",
        "--lambdas",
        "1e1:1e4:5",
        "--levels",
        "1",
        "--threads",
        "1",
    ]);
    assert_eq!(exit_code(&base), 0);
    assert_eq!(base.stdout, threaded.stdout);
}
