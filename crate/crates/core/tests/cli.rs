use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss-cubature"))
        .args(args)
        .output()
        .expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn exit_code_contract() {
    assert_eq!(
        code(&bin(&["exists", "--catalog", "lebesgue^1", "--m", "3"])),
        0
    );
    assert_eq!(
        code(&bin(&["exists", "--catalog", "lebesgue^2", "--m", "2"])),
        10
    );
    assert_eq!(
        code(&bin(&["exists", "--catalog", "bogus^2", "--m", "2"])),
        20
    );
    assert_eq!(code(&bin(&["exists", "--m", "2"])), 20);
}

#[test]
fn cubature_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let rule = dir.path().join("rule.txt");
    let rule = rule.to_str().unwrap();
    let o = bin(&[
        "cubature",
        "--catalog",
        "lebesgue^1",
        "--m",
        "3",
        "--out",
        rule,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&[
        "verify",
        "--rule",
        rule,
        "--catalog",
        "lebesgue^1",
        "--tol",
        "1e-10",
        "--format",
        "machine",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["max_rel_error"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["node_count"], 3);

    // The rule of a different measure fails verification.
    let o = bin(&["verify", "--rule", rule, "--catalog", "chebyshev1^1"]);
    assert_eq!(code(&o), 10);
}

#[test]
fn moment_file_source_matches_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sym.moments");
    let f = file.to_str().unwrap();
    let o = bin(&[
        "moments",
        "--catalog",
        "symmetrized:0.5",
        "--d-max",
        "12",
        "--out",
        f,
    ]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(f).exists());

    let from_file = bin(&[
        "cubature",
        "--moments",
        f,
        "--m",
        "3",
        "--format",
        "machine",
    ]);
    let from_catalog = bin(&[
        "cubature",
        "--catalog",
        "symmetrized:0.5",
        "--m",
        "3",
        "--format",
        "machine",
    ]);
    assert_eq!(code(&from_file), 0);
    let a: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&from_catalog.stdout).unwrap();
    assert_eq!(a["nodes"], b["nodes"]);
    assert_eq!(a["weights"], b["weights"]);

    // Not enough moments for m = 4.
    assert_eq!(code(&bin(&["exists", "--moments", f, "--m", "4"])), 20);
}

#[test]
fn machine_reports_are_byte_identical() {
    let args = [
        "cubature",
        "--catalog",
        "symmetrized:0.5",
        "--m",
        "3",
        "--format",
        "machine",
        "--seed",
        "9",
    ];
    let a = bin(&args);
    let b = bin(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn corrupt_moment_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.moments");
    std::fs::write(
        &file,
        "n: 1\nd_max: 2\nnormalized: false\nscale: 1\n\"0\": 1\n\"1\": 0\n",
    )
    .unwrap();
    let o = bin(&["exists", "--moments", file.to_str().unwrap(), "--m", "1"]);
    assert_eq!(code(&o), 20);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn indefinite_moments_are_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("neg.moments");
    // y2 < y1^2: not a moment sequence of any measure.
    std::fs::write(
        &file,
        "n: 1\nd_max: 4\nnormalized: true\nscale: 1\n\"0\": 1\n\"1\": 0.5\n\"2\": 0.1\n\"3\": 0\n\"4\": 1\n",
    )
    .unwrap();
    let o = bin(&["exists", "--moments", file.to_str().unwrap(), "--m", "1"]);
    assert_eq!(code(&o), 30);
}
