//! End-to-end checks of the command-line surface and its exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn asset(rel: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "assets", rel].iter().collect();
    path.to_str().unwrap().to_string()
}

fn qrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrw")).args(args).output().expect("spawning the binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn entropy_prints_each_requested_subset() {
    let out = qrw(&[
        "entropy",
        "--in",
        &asset("states/gamma.json"),
        "--subset",
        "A",
        "--subset",
        "A,B",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("H(A) = 0.811278124"), "{text}");
    assert!(text.contains("H(A,B) = 0.600876037"), "{text}");
}

#[test]
fn coeffs_reports_the_cobit_point() {
    let out = qrw(&[
        "coeffs",
        "--channel",
        &asset("channels/cobit.json"),
        "--state",
        &asset("states/tau.json"),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q = 0.500000000") && text.contains("e = 0.500000000"), "{text}");
}

#[test]
fn prove_accepts_a_valid_script() {
    let out = qrw(&["prove", &asset("derivations/ff.deriv")]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PROVED"), "{}", stdout(&out));
}

#[test]
fn prove_rejects_a_corrupted_script_with_exit_one() {
    let out = qrw(&["prove", &asset("derivations/ff-neg.deriv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("NOT PROVED"), "{}", stdout(&out));
}

#[test]
fn missing_input_file_exits_two() {
    let out = qrw(&["entropy", "--in", "/no/such/state.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_state_exits_two() {
    let dir = std::env::temp_dir().join(format!("qrw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"density\"}").unwrap();
    let out = qrw(&["entropy", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn axioms_lists_the_database() {
    let out = qrw(&["axioms"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("cobit-identity"), "{text}");
    assert!(text.lines().count() >= 20, "{text}");
}

#[test]
fn region_emits_csv_with_a_header() {
    let out = qrw(&[
        "--format",
        "csv",
        "region",
        "--channel",
        &asset("channels/cobit.json"),
        "--samples",
        "16",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("q,e,kind"), "{text}");
    assert!(text.lines().count() > 16, "{text}");
}

#[test]
fn simulate_concentration_sweep_as_csv() {
    let out = qrw(&[
        "--format",
        "csv",
        "simulate",
        "concentration",
        "--p",
        "0.1",
        "--n",
        "10",
        "--n",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,per_copy,target,gap"), "{text}");
    assert_eq!(text.trim_end().lines().count(), 3, "{text}");
}

#[test]
fn verify_cobit_succeeds() {
    let out = qrw(&["verify-cobit"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ok"), "{}", stdout(&out));
}

#[test]
fn capacity_of_the_binary_symmetric_channel() {
    let out = qrw(&["capacity", "--bsc", "0.11", "--tol", "1e-9"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0.5000840"), "{}", stdout(&out));
}

#[test]
fn out_flag_writes_the_result_to_a_file() {
    let dir = std::env::temp_dir().join(format!("qrw-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("pair.csv");
    let out = qrw(&[
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
        "coeffs",
        "--channel",
        &asset("channels/id.json"),
        "--state",
        &asset("states/rho09.json"),
    ]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("q,e\n0.4689955935"), "{written}");
    std::fs::remove_dir_all(&dir).ok();
}
