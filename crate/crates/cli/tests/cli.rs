use std::path::PathBuf;
use std::process::{Command, Output};

use qmagic::RootMatrix;
use serde_json::Value;

fn qmagic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmagic"))
        .args(args)
        .env_remove("QMAGIC_MAX_DIM")
        .env_remove("QMAGIC_MAX_SUBSETS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn assert_golden(args: &[&str], name: &str) {
    let out = qmagic(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out), golden(name), "qmagic {}", args.join(" "));
}

#[test]
fn golden_outputs() {
    assert_golden(
        &["verify", "identity", "--l", "3", "--n", "2"],
        "verify_identity_l3_n2.json",
    );
    assert_golden(
        &["verify", "theorem", "--l", "2", "--n", "2", "--mode", "exhaustive"],
        "verify_theorem_l2_n2_exhaustive.json",
    );
    assert_golden(
        &["indep-set", "--l", "5", "--m", "2", "--format", "json"],
        "indep_set_l5_m2.json",
    );
    assert_golden(
        &[
            "verify",
            "theorem",
            "--l",
            "3",
            "--n",
            "3",
            "--mode",
            "sampled",
            "--samples",
            "5000",
            "--seed",
            "7",
        ],
        "verify_theorem_l3_n3_sampled_seed7.json",
    );
    assert_golden(
        &[
            "search", "--l", "3", "--n", "2", "--size", "4", "--seed", "3", "--iters", "2000",
        ],
        "search_l3_n2_size4_seed3.json",
    );
    assert_golden(
        &["build-b", "--l", "2", "--n", "2", "--format", "dump"],
        "build_b_l2_n2.dump",
    );
    assert_golden(
        &["spectral", "--l", "2", "--n", "2", "--format", "csv"],
        "spectral_l2_n2.csv",
    );
}

#[test]
fn identity_report_fields() {
    let out = qmagic(&["verify", "identity", "--l", "3", "--n", "2"]);
    let text = stdout(&out);
    assert!(text.starts_with(r#"{"identity":"B_n^l=nI","l":3,"n":2,"pass":true,"#));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn every_json_report_parses() {
    let cases: &[&[&str]] = &[
        &["build-b", "--l", "3", "--n", "2"],
        &["verify", "identity", "--l", "2", "--n", "4"],
        &["verify", "pattern", "--l", "3", "--n", "3"],
        &["verify", "theorem", "--l", "3", "--n", "2"],
        &[
            "verify",
            "theorem",
            "--l",
            "2",
            "--n",
            "3",
            "--mode",
            "sampled",
            "--samples",
            "100",
        ],
        &["spectral", "--l", "3", "--n", "2"],
        &["witness", "--l", "3", "--n", "2", "--seed", "4"],
        &["indep-set", "--l", "4", "--m", "3"],
        &["search", "--l", "3", "--n", "3", "--size", "9", "--init", "referee"],
    ];
    for args in cases {
        let out = qmagic(args);
        assert_eq!(out.status.code(), Some(0), "qmagic {}", args.join(" "));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["schema_version"], 1, "qmagic {}", args.join(" "));
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    for threads in ["1", "2", "8"] {
        let sampled = [
            "verify",
            "theorem",
            "--l",
            "3",
            "--n",
            "3",
            "--mode",
            "sampled",
            "--samples",
            "5000",
            "--seed",
            "7",
            "--threads",
            threads,
        ];
        assert_eq!(
            stdout(&qmagic(&sampled)),
            golden("verify_theorem_l3_n3_sampled_seed7.json")
        );
        let search = [
            "search",
            "--l",
            "3",
            "--n",
            "2",
            "--size",
            "4",
            "--seed",
            "3",
            "--iters",
            "2000",
            "--threads",
            threads,
        ];
        assert_eq!(stdout(&qmagic(&search)), golden("search_l3_n2_size4_seed3.json"));
    }
}

#[test]
fn timing_is_opt_in() {
    let args = ["verify", "theorem", "--l", "2", "--n", "2"];
    let plain: Value = serde_json::from_str(&stdout(&qmagic(&args))).unwrap();
    assert!(plain.get("elapsed_ms").is_none());
    let mut timed_args = args.to_vec();
    timed_args.push("--timing");
    let timed: Value = serde_json::from_str(&stdout(&qmagic(&timed_args))).unwrap();
    assert!(timed["elapsed_ms"].is_number());
}

#[test]
fn exit_codes() {
    // usage
    assert_eq!(qmagic(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qmagic(&["verify", "identity", "--l", "1", "--n", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qmagic(&["indep-set", "--l", "3", "--m", "2", "--format", "dump"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qmagic(&["witness", "--l", "2", "--n", "2", "--subset", "0,9"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qmagic(&["search", "--l", "2", "--n", "2", "--size", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qmagic(&["spectral", "--l", "2", "--n", "2", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    // resource limits
    assert_eq!(qmagic(&["build-b", "--l", "3", "--n", "9"]).status.code(), Some(3));
    assert_eq!(
        qmagic(&["verify", "theorem", "--l", "3", "--n", "4"]).status.code(),
        Some(3)
    );
    assert_eq!(
        qmagic(&["verify", "theorem", "--l", "2", "--n", "4", "--max-subsets", "100"])
            .status
            .code(),
        Some(3)
    );
    // a failed check: with an absurdly small tolerance no eigenvalue is detected
    let out = qmagic(&["spectral", "--l", "2", "--n", "2", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn limits_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qmagic"))
        .args(["build-b", "--l", "3", "--n", "2"])
        .env("QMAGIC_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_qmagic"))
        .args(["build-b", "--l", "3", "--n", "2", "--max-dim", "9"])
        .env("QMAGIC_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dump_round_trips_through_the_core_parser() {
    let out = qmagic(&["build-b", "--l", "3", "--n", "3", "--format", "dump"]);
    let parsed = RootMatrix::parse_dump(&stdout(&out)).unwrap();
    let built = qmagic::qmatrix::build_b(3, 3, &qmagic::Limits::default()).unwrap();
    assert_eq!(parsed, built);
}

#[test]
fn subset_literals_and_files() {
    let inline = qmagic(&["witness", "--l", "2", "--n", "2", "--subset", "0,1,2"]);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut file, b"0\n1\n2\n").unwrap();
    let arg = format!("@{}", file.path().display());
    let from_file = qmagic(&["witness", "--l", "2", "--n", "2", "--subset", &arg]);
    assert_eq!(inline.status.code(), Some(0));
    assert_eq!(stdout(&inline), stdout(&from_file));
    let v: Value = serde_json::from_str(&stdout(&inline)).unwrap();
    assert_eq!(v["found"], true);
    assert!(v["witness"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["max_row_norm"], 2);

    // even parity class of C_2^2: no eigenvector is supported on it
    let v: Value = serde_json::from_str(&stdout(&qmagic(&[
        "witness", "--l", "2", "--n", "2", "--subset", "0,3",
    ])))
    .unwrap();
    assert_eq!(v["found"], false);

    assert_eq!(
        qmagic(&["witness", "--l", "2", "--n", "2", "--subset", "@/nonexistent/subset"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn dot_and_csv_outputs() {
    let dot = stdout(&qmagic(&["indep-set", "--l", "3", "--m", "2", "--format", "dot"]));
    assert!(dot.starts_with("digraph G {"));
    assert_eq!(dot.matches("style=filled").count(), 3);
    assert_eq!(dot.matches(" -> ").count(), 18);

    let dot = stdout(&qmagic(&["build-b", "--l", "2", "--n", "3", "--format", "dot"]));
    assert_eq!(dot.matches(" -> ").count(), 24);
    assert!(dot.contains("label=\"101\""));

    let csv = stdout(&qmagic(&["indep-set", "--l", "5", "--m", "2", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(csv.lines().nth(1), Some("1,01"));

    let csv = stdout(&qmagic(&[
        "verify", "theorem", "--l", "3", "--n", "2", "--format", "csv",
    ]));
    assert_eq!(
        csv.lines().nth(1),
        Some("3,2,exhaustive,7,1.2599210498948732,2,36,2,true")
    );
}
