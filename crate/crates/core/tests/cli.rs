//! End-to-end runs of the `orbitscope` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_orbitscope"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn real_points(n: usize) -> String {
    let data: Vec<String> = (0..2 * n * n).map(|k| u8::from(k / n == k % n).to_string()).collect();
    format!(
        r#"{{"structure":{{"n":{n}}},"basis":{{"rows":{},"cols":{n},"field":"real","data":[{}]}}}}"#,
        2 * n,
        data.join(",")
    )
}

const OPEN_PLANE: &str =
    r#"{"ambient":{"p":2,"q":2},"basis":{"rows":4,"cols":2,"field":"real","data":[1,0,0,1,0,0,0,0]}}"#;

#[test]
fn classify_real_points_as_positive() {
    for n in [2, 3] {
        let v = json(&run(&["classify"], &real_points(n)));
        assert_eq!((v["r"].as_u64(), v["s"].as_u64()), (Some(n as u64), Some(0)));
    }
}

#[test]
fn classify_rational_field_matches_float() {
    let a = json(&run(&["classify"], OPEN_PLANE));
    let b = json(&run(&["--field", "rational", "classify"], OPEN_PLANE));
    assert_eq!((&a["r"], &a["s"], &a["nu"]), (&b["r"], &b["s"], &b["nu"]));
    assert_eq!(a["r"], 2);
}

#[test]
fn sigma_never_vanishes_on_the_open_orbit() {
    let v = json(&run(&["sigma"], OPEN_PLANE));
    let verdicts = v.as_array().unwrap();
    assert_eq!(verdicts.len(), 2);
    assert!(verdicts.iter().all(|e| e["verdict"]["zero"] == false));
}

#[test]
fn codim_table_matches_for_self_dual_three() {
    let v = json(&run(&["codim-table", "--n", "3", "--duality", "self-dual"], ""));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["matched"] == true));
}

#[test]
fn codim_table_renders_markdown() {
    let out = run(&["codim-table", "--p", "2", "--q", "2", "--i", "2", "--format", "markdown"], "");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with('|'));
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 2 + 6);
}

#[test]
fn ambiguous_point_exits_with_two() {
    // second restriction eigenvalue 1 − (1 − 5e-10)² ≈ 1e-9 sits at the threshold
    let point = r#"{"ambient":{"p":2,"q":1},"basis":{"rows":3,"cols":2,"field":"real","data":[1,0,0,1,0,0.9999999995]}}"#;
    let out = run(&["classify"], point);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_input_exits_with_one() {
    for input in ["not json", r#"{"rows":2}"#, r#"{"ambient":{"p":1,"q":1},"basis":{"rows":2,"cols":1,"field":"real","data":[1]}}"#] {
        let out = run(&["classify"], input);
        assert_eq!(out.status.code(), Some(1), "{input}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn out_flag_writes_the_file() {
    let dir = std::env::temp_dir().join(format!("orbitscope-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("label.json");
    let out = run(&["--out", path.to_str().unwrap(), "classify"], OPEN_PLANE);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["r"], 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_file_argument_is_read() {
    let dir = std::env::temp_dir().join(format!("orbitscope-in-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("point.json");
    std::fs::write(&path, real_points(2)).unwrap();
    let v = json(&run(&["iso-classify", path.to_str().unwrap()], ""));
    assert_eq!(v["label"]["duality"], "self-dual");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn campaign_is_deterministic_across_threads() {
    let cfg = r#"{"scenario":{"kind":"grassmann","p":2,"q":2,"i":2},"samples":300,"seed":11,"checks":["classification","zero-locus","census"]}"#;
    let a = json(&run(&["--threads", "1", "campaign"], cfg));
    let b = json(&run(&["--threads", "4", "campaign"], cfg));
    assert_eq!(a, b);
    assert_eq!(a["passed"], true);
    let c = json(&run(&["--seed", "12", "campaign"], cfg));
    assert_eq!(c["config"]["seed"], 12);
}

#[test]
fn rational_field_is_rejected_for_sampling_commands() {
    let cfg = r#"{"scenario":{"kind":"grassmann","p":1,"q":1,"i":1},"samples":1,"seed":1}"#;
    let out = run(&["--field", "rational", "campaign"], cfg);
    assert_eq!(out.status.code(), Some(1));
}
