use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotoidal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn trivial_invariant_is_one() {
    let o = run(&["invariant", "--fixture", "trivial"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn epsilon_zero_part_starts_with_one() {
    let o = run(&["invariant", "--fixture", "5_7", "--eps-order", "1", "--hbar-order", "3", "--coefficient", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("1"));
}

#[test]
fn json_invariant_carries_fingerprint() {
    let o = run(&["invariant", "--fixture", "5_9", "--hbar-order", "2", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 64);
    assert_eq!(v["value"]["caps"]["hbar"], 2);
}

#[test]
fn parse_and_load_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "labels 2\nR+ 1 7\n").unwrap();
    assert_eq!(run(&["invariant", "--file", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.txt");
    assert_eq!(run(&["invariant", "--file", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["invariant", "--fixture", "9_99"]).status.code(), Some(2));
    assert_eq!(run(&["measure", "--file", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn decomposition_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curl.txt");
    std::fs::write(&path, "labels 3\n# a positive curl\nR+ 1 3\nC- 2\n").unwrap();
    let o = run(&["invariant", "--file", path.to_str().unwrap(), "--hbar-order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).is_empty());
}

#[test]
fn caps_failures_exit_3() {
    assert_eq!(run(&["invariant", "--fixture", "5_7", "--hbar-order", "99"]).status.code(), Some(3));
    let o = run(&["invariant", "--fixture", "5_7", "--hbar-order", "2", "--coefficient", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_failures_exit_1() {
    assert_eq!(run(&["measure", "--fixture", "open_trefoil", "--samples", "0"]).status.code(), Some(1));
    assert_eq!(run(&["invariant"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_knotoidal"))
        .args(["invariant", "--fixture", "trivial"])
        .env("KNOTOIDAL_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_cap_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_knotoidal"))
        .args(["invariant", "--fixture", "5_9", "--hbar-order", "2"])
        .env("KNOTOIDAL_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), stdout(&run(&["invariant", "--fixture", "5_9", "--hbar-order", "2"])));
}

#[test]
fn self_comparison_is_equal() {
    let o = run(&["compare", "--fixtures", "5_7", "5_7", "--hbar-order", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["direct"]["result"], "equal");
}

#[test]
fn distinguished_pair_passes_expectation() {
    let o = run(&[
        "compare", "--fixtures", "5_9", "5_561", "--with-reversal", "--expect-distinct", "--hbar-order", "3",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["direct"]["result"], "differ");
    assert_eq!(v["reversed"]["result"], "differ");
}

#[test]
fn undistinguished_pair_fails_expectation() {
    let o = run(&["compare", "--fixtures", "5_7", "5_421", "--expect-distinct", "--hbar-order", "3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("equal up to caps"));
}

#[test]
fn epsilon_zero_table() {
    let o = run(&["table", "--eps-order", "0", "--hbar-order", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["summary"]["equal"], 3);
    assert_eq!(v["summary"]["differ"], 0);
    assert_eq!(v["summary"]["unavailable"], 3);
}

#[test]
fn straight_segment_measure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seg.xyz");
    std::fs::write(&path, "0 0 0\n1 0.5 2\n").unwrap();
    let o = run(&["measure", "--file", path.to_str().unwrap(), "--samples", "50", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["class_freq"]["trivial"], 1.0);
    assert_eq!(v["rejected"], 0);
    assert_eq!(v["dominant"], "trivial");
}

#[test]
fn measure_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let args = ["measure", "--fixture", "open_trefoil", "--seed", "0", "--format", "json", "--csv", csv.to_str().unwrap()];
    let a = run(&args);
    let first_csv = std::fs::read_to_string(&csv).unwrap();
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first_csv, std::fs::read_to_string(&csv).unwrap());
    assert!(first_csv.starts_with("class,count,frequency\n"));
    let v = json(&a);
    assert_eq!(v["samples"], 2000);
    assert_eq!(v["class_counts"]["trivial"], 708);
    assert_eq!(v["dominant"], "trivial");
}

#[test]
fn reverse_adds_two_hooks() {
    let o = run(&["reverse", "--fixture", "5_561"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("labels 14\nC+ 1\n"));
    assert!(text.ends_with("C- 14\n"));
}
