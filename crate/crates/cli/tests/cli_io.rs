use std::path::Path;
use std::process::{Command, Output};

use nsp_core::linalg::{BlockPartition, DenseMatrix, InnerNorm, SymMatrix};
use nsp_core::sensing::{Sensing, Signal};
use nsp_lab::fixtures::psd_block_example_file;
use nsp_lab::schema::{InstanceFile, SymMatrixFile, SCHEMA};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsp-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_json(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

/// Timing fields are the only run-to-run variation the contract allows;
/// nulling them makes reports comparable byte-wise.
fn null_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, val) in map.iter_mut() {
                if k == "elapsed_ms" {
                    *val = Value::Null;
                } else {
                    null_timings(val);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(null_timings),
        _ => {}
    }
}

#[test]
fn instance_files_roundtrip_through_serde() {
    let a = DenseMatrix::from_rows(vec![vec![1.0, -1.0, 0.5], vec![0.0, 2.0, 1.0]]).unwrap();
    let p = BlockPartition::from_blocks(vec![vec![0], vec![1, 2]]).unwrap();
    let file = InstanceFile::encode(
        "block-q1",
        &Sensing::Vector(a),
        Some(&p),
        Some(InnerNorm::One),
        Some(&[1.0, 0.0]),
        Some(&Signal::Vector(vec![0.5, 0.0, 0.0])),
    );
    let text = serde_json::to_string(&file).unwrap();
    let back: InstanceFile = serde_json::from_str(&text).unwrap();
    let dec = back.decode(None).unwrap();
    assert_eq!(dec.tag, "block-q1");
    assert_eq!(dec.q, Some(InnerNorm::One));
    assert_eq!(dec.b.as_deref(), Some(&[1.0, 0.0][..]));
    let Sensing::Vector(ref a2) = dec.sensing else {
        panic!("vector operator expected")
    };
    assert_eq!(a2.row(0), &[1.0, -1.0, 0.5]);

    let ms = psd_block_example_file("block-nuclear-psd");
    let text = serde_json::to_string(&ms).unwrap();
    let back: InstanceFile = serde_json::from_str(&text).unwrap();
    let dec = back.decode(None).unwrap();
    let Sensing::Matrix(ref op) = dec.sensing else {
        panic!("matrix operator expected")
    };
    assert_eq!(op.measurements(), 4);
    assert_eq!(op.dim(), 4);
}

#[test]
fn symmetric_payload_accepts_tiny_asymmetry_and_rejects_large() {
    let near = SymMatrixFile {
        dim: 2,
        upper: None,
        rows: Some(vec![vec![1.0, 0.5 + 4e-9], vec![0.5 - 4e-9, 2.0]]),
    };
    let m = near.decode().expect("asymmetry below 1e-8 symmetrizes");
    assert!((m.get(0, 1) - 0.5).abs() < 1e-8);

    let far = SymMatrixFile {
        dim: 2,
        upper: None,
        rows: Some(vec![vec![1.0, 0.6], vec![0.4, 2.0]]),
    };
    assert!(far.decode().is_err());

    let both = SymMatrixFile {
        dim: 2,
        upper: Some(vec![1.0, 0.5, 2.0]),
        rows: Some(vec![vec![1.0, 0.5], vec![0.5, 2.0]]),
    };
    assert!(both.decode().is_err(), "exactly one payload form is allowed");
}

#[test]
fn instance_decode_rejects_malformed_inputs() {
    let good = psd_block_example_file("block-nuclear-psd");

    let mut wrong_schema = good.clone();
    wrong_schema.schema = "nsp-lab/9".into();
    assert!(wrong_schema.decode(None).is_err());

    let mut wrong_tag = good.clone();
    wrong_tag.setting = "sparse".into();
    assert!(wrong_tag.decode(None).is_err());

    let mut no_partition = good.clone();
    no_partition.partition = None;
    assert!(no_partition.decode(None).is_err());

    let mut short_b = good.clone();
    short_b.b = Some(vec![1.0]);
    assert!(short_b.decode(None).is_err());

    assert!(good.decode(Some("2")).is_err(), "q is reserved for block-q1");
    assert_eq!(good.decode(None).unwrap().tag, "block-nuclear-psd");
}

#[test]
fn check_nsp_subcommand_reports_the_example_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let psd = serde_json::to_value(psd_block_example_file("block-nuclear-psd")).unwrap();
    let plain = serde_json::to_value(psd_block_example_file("block-nuclear")).unwrap();
    let psd_path = write_json(dir.path(), "psd.json", &psd);
    let plain_path = write_json(dir.path(), "plain.json", &plain);

    let out = run(&["check-nsp", "--setting", "block-nuclear-psd", "--order", "1", "--in", &psd_path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["schema"], SCHEMA);
    assert_eq!(rep["verdict"]["holds"], true);
    assert_eq!(rep["verdict"]["method"], "exact");
    assert_eq!(rep["null_space_dim"], 1);

    let out = run(&["check-nsp", "--setting", "block-nuclear", "--order", "1", "--in", &plain_path]);
    assert_eq!(out.status.code(), Some(0), "a failing property is still a successful run");
    let rep = stdout_json(&out);
    assert_eq!(rep["verdict"]["holds"], false);
    assert_eq!(rep["verdict"]["witness"]["support"], json!([1]));
}

#[test]
fn solve_subcommand_reports_objective_and_uniqueness() {
    let dir = tempfile::tempdir().unwrap();
    let a = DenseMatrix::from_rows(vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
    let file = InstanceFile::encode(
        "l1",
        &Sensing::Vector(a),
        None,
        None,
        None,
        Some(&Signal::Vector(vec![1.0, 0.0, 0.0])),
    );
    let path = write_json(dir.path(), "solve.json", &serde_json::to_value(&file).unwrap());

    let out = run(&["solve", "--setting", "l1", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["solver"], "simplex");
    assert!((rep["objective"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(rep["uniqueness"]["verdict"], "unique");
}

#[test]
fn exit_codes_follow_the_contract() {
    let out = run(&["check-nsp", "--setting", "l1", "--order", "1", "--in", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2), "unreadable input is an input error");

    let out = run(&["construct-family", "--m", "5", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2), "k must exceed m");

    let out = run(&["check-nsp", "--setting", "l1", "--order", "0", "--in", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let psd = serde_json::to_value(psd_block_example_file("block-nuclear-psd")).unwrap();
    let path = write_json(dir.path(), "psd.json", &psd);
    let out = run(&["check-nsp", "--setting", "nuclear", "--order", "1", "--in", &path]);
    assert_eq!(out.status.code(), Some(2), "flag and file settings must agree");

    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_reports_are_deterministic_modulo_timings() {
    let args = ["experiment", "--setting", "l1-nonneg", "--order", "2", "--trials", "6", "--seed", "11"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    let mut a = stdout_json(&first);
    let mut b = stdout_json(&second);
    null_timings(&mut a);
    null_timings(&mut b);
    assert_eq!(a, b, "same seed and inputs must reproduce the report");

    let mut parallel = {
        let mut args = args.to_vec();
        args.extend(["--jobs", "3"]);
        stdout_json(&run(&args))
    };
    null_timings(&mut parallel);
    assert_eq!(
        a["results"], parallel["results"],
        "trial reports must not depend on the worker count"
    );
    assert_eq!(a["summary"], parallel["summary"]);
}

#[test]
fn experiment_with_zero_trials_is_an_empty_success() {
    let out = run(&["experiment", "--setting", "l1", "--trials", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["results"], json!([]));
    assert_eq!(rep["summary"]["violations"], 0);
}

#[test]
fn fixed_instance_experiment_confirms_the_example_pair() {
    let dir = tempfile::tempdir().unwrap();
    let psd = serde_json::to_value(psd_block_example_file("block-nuclear-psd")).unwrap();
    let path = write_json(dir.path(), "psd.json", &psd);
    let out = run(&["experiment", "--order", "1", "--trials", "4", "--seed", "7", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["mode"], "fixed-instance");
    assert_eq!(rep["verdict"]["holds"], true);
    assert_eq!(rep["summary"]["violations"], 0);
    assert_eq!(rep["summary"]["recovered_unique"], 4);

    let plain = serde_json::to_value(psd_block_example_file("block-nuclear")).unwrap();
    let path = write_json(dir.path(), "plain.json", &plain);
    let out = run(&["experiment", "--order", "1", "--trials", "2", "--seed", "7", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["verdict"]["holds"], false);
    assert_eq!(rep["counterexample"]["consistent"], true);
    assert_eq!(rep["summary"]["violations"], 0);
}

#[test]
fn check_neighborly_distinguishes_square_edges_from_diagonals() {
    let dir = tempfile::tempdir().unwrap();
    let square = json!({
        "schema": SCHEMA,
        "points": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    });
    let path = write_json(dir.path(), "square.json", &square);

    let out = run(&["check-neighborly", "--in", &path, "--order", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["neighborly"], true);

    let out = run(&["check-neighborly", "--in", &path, "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["neighborly"], false, "square diagonals are not edges");
    assert_eq!(rep["outward"], false);
}

#[test]
fn construct_family_emits_the_documented_layout() {
    let out = run(&["construct-family", "--m", "6", "--k", "7", "--validate"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["s_star"], 2);
    assert_eq!(rep["null_space_dim"], 2);
    assert_eq!(rep["partition"][0], json!([1, 2]));
    assert_eq!(rep["all_passed"], true);
    assert_eq!(rep["matrix"]["rows"].as_array().unwrap().len(), 6);

    let out = run(&["construct-family", "--m", "6", "--k", "7", "--ts", "1,2"]);
    assert_eq!(out.status.code(), Some(2), "parameter count must be k-1");
}

#[test]
fn normalized_family_columns_have_unit_length() {
    let out = run(&["construct-family", "--m", "6", "--k", "7", "--normalize"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    let rows: Vec<Vec<f64>> = serde_json::from_value(rep["matrix"]["rows"].clone()).unwrap();
    for j in 0..rows[0].len() {
        let norm: f64 = rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12, "column {j} has norm {norm}");
    }
}

#[test]
fn out_flag_writes_the_same_report_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run(&[
        "fixtures",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "--out redirects the report");
    let mut written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    let mut direct = stdout_json(&run(&["fixtures"]));
    null_timings(&mut written);
    null_timings(&mut direct);
    assert_eq!(written, direct);
    assert_eq!(written["all_passed"], true);
}

#[test]
fn fixture_suite_passes_from_the_library_entry_point() {
    let suite = nsp_lab::fixtures::run_fixture_suite();
    assert!(suite.all_passed, "fixture suite: {:#?}", suite.fixtures);
    assert_eq!(suite.fixtures.len(), 3);
}

#[test]
fn solve_accepts_explicit_measurements_without_a_signal() {
    let dir = tempfile::tempdir().unwrap();
    let mut e11 = SymMatrix::zeros(2);
    e11.set(0, 0, 1.0);
    let s = Sensing::Matrix(nsp_core::sensing::MatrixSensing::new(vec![e11], None).unwrap());
    let file = InstanceFile::encode("nuclear", &s, None, None, Some(&[1.0]), None);
    let path = write_json(dir.path(), "nuc.json", &serde_json::to_value(&file).unwrap());

    let out = run(&["solve", "--setting", "nuclear", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["solver"], "splitting");
    assert!((rep["objective"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(rep.get("uniqueness").is_none() || rep["uniqueness"].is_null());
}
