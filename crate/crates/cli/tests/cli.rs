use std::process::{Command, Output};

fn cutstack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutstack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = cutstack(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn assert_golden(name: &str, args: &[&str]) {
    let got = stdout_of(args);
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {path}: {e}"));
    assert_eq!(got, want, "output of {args:?} drifted from {name}");
}

#[test]
fn golden_demo_thm1() {
    assert_golden(
        "demo_thm1.csv",
        &["demo", "thm1", "--h", "4", "--from", "1", "--to", "20"],
    );
}

#[test]
fn golden_demo_thm6() {
    assert_golden(
        "demo_thm6.csv",
        &["demo", "thm6", "--n", "1", "--from", "4", "--to", "8"],
    );
}

#[test]
fn golden_joining() {
    assert_golden(
        "joining.csv",
        &[
            "joining", "--A", "base(4)", "--B", "base(4)", "--from", "4", "--to", "8",
        ],
    );
}

#[test]
fn golden_scan() {
    assert_golden(
        "scan.csv",
        &["scan", "--A", "base(2)", "--B", "base(2)", "--from", "0", "--to", "40"],
    );
}

#[test]
fn golden_scan_json() {
    assert_golden(
        "scan.json",
        &[
            "scan", "--A", "base(2)", "--B", "base(2)", "--from", "0", "--to", "8",
            "--format", "json",
        ],
    );
}

#[test]
fn seeded_probes_are_deterministic() {
    let a = stdout_of(&["uso", "--A", "base(2)", "--n", "3", "--trials", "6", "--seed", "9", "--max-shift", "40"]);
    let b = stdout_of(&["uso", "--A", "base(2)", "--n", "3", "--trials", "6", "--seed", "9", "--max-shift", "40"]);
    assert_eq!(a, b);
    let c = stdout_of(&["uso", "--A", "base(2)", "--n", "3", "--trials", "6", "--seed", "10", "--max-shift", "40"]);
    assert_ne!(a, c);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cutstack(&["scan", "--A", "bogus((", "--B", "base(2)"]).status.code(), Some(1));
    assert_eq!(cutstack(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cutstack(&["scan", "--A", "base(2)", "--B", "base(2)", "--eps", "0"]).status.code(), Some(1));
    assert_eq!(cutstack(&["scheme", "parse", "--scheme", "tail: cuts=1 spacers=[0]"]).status.code(), Some(1));
}

#[test]
fn refuted_invariants_exit_two() {
    // the feasibility gate needs mu(A) < 1/4 for N=1
    let out = cutstack(&["demo", "thm6", "--n", "1", "--A", "interval(0,1/3)"]);
    assert_eq!(out.status.code(), Some(2));
    // the report is still written before the gate verdict
    assert!(String::from_utf8_lossy(&out.stdout).contains("feasible=false"));
}

#[test]
fn resource_caps_exit_three() {
    let out = cutstack(&[
        "scan", "--A", "base(2)", "--B", "base(2)", "--from", "1000", "--to", "1000",
        "--stage-cap", "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cutstack(&["--help"]).status.code(), Some(0));
    assert_eq!(cutstack(&["--version"]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("cutstack-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.csv");
    let args = [
        "scan", "--A", "base(2)", "--B", "base(2)", "--from", "0", "--to", "5",
        "--out", path.to_str().unwrap(),
    ];
    let out = cutstack(&args);
    assert!(out.status.success());
    let file = std::fs::read_to_string(&path).unwrap();
    let direct = stdout_of(&args[..args.len() - 2]);
    assert_eq!(file, direct);
    std::fs::remove_dir_all(&dir).unwrap();
}
