//! End-to-end checks of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gatelock"))
}

fn run(args: &[&str], dir: &Path) -> (bool, String, String, Option<i32>) {
    let out = bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code(),
    )
}

fn adder_bench(dir: &Path) -> PathBuf {
    let n = gatelock::benchgen::ripple_carry_adder(6);
    let path = dir.join("adder6.bench");
    gatelock::bench::write_bench_file(&n, &path).unwrap();
    path
}

#[test]
fn lock_writes_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let bench = adder_bench(tmp.path());
    let (ok, stdout, stderr, _) = run(
        &["lock", "--scheme", "rll", "--keys", "4", "--seed", "7", "adder6.bench"],
        tmp.path(),
    );
    assert!(ok, "stdout: {stdout} stderr: {stderr}");
    assert!(tmp.path().join("adder6.locked.bench").is_file());
    assert!(tmp.path().join("adder6.key").is_file());
    assert!(tmp.path().join("adder6.lock.json").is_file());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("adder6.lock.json")).unwrap())
            .unwrap();
    assert_eq!(json["scheme"], "RLL");
    assert_eq!(json["records"].as_array().unwrap().len(), 4);
    let _ = bench;
}

#[test]
fn cm_lock_emits_family_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    let (ok, stdout, stderr, _) = run(
        &["lock", "--scheme", "cm", "--budget", "6:16", "--cluster", "1", "--seed", "11", "adder6.bench"],
        tmp.path(),
    );
    assert!(ok, "stdout: {stdout} stderr: {stderr}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("adder6.lock.json")).unwrap())
            .unwrap();
    assert_eq!(json["scheme"], "CM");
    let families = json["families"].as_array().unwrap();
    assert!(!families.is_empty());
    for f in families {
        assert!(f["fingerprint"].is_string());
        assert!(f["instance_roots"].as_array().unwrap().len() >= 1);
        assert!(f["shared_key"].is_boolean());
    }
}

#[test]
fn attack_then_verify_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    run(
        &["lock", "--scheme", "rll", "--keys", "3", "--seed", "3", "adder6.bench"],
        tmp.path(),
    );
    let (ok, stdout, _, _) = run(&["attack", "adder6.locked.bench"], tmp.path());
    assert!(ok);
    assert!(stdout.contains("wrote"));
    let preds = std::fs::read_to_string(tmp.path().join("adder6.locked.pred")).unwrap();
    assert_eq!(preds.lines().count(), 3);
    for line in preds.lines() {
        assert!(line.starts_with("keyinput"));
        let value = line.split('=').nth(1).unwrap();
        assert!(matches!(value, "0" | "1" | "X"));
    }

    // verify with the correct key passes (exit 0)
    let (ok, stdout, _, code) = run(
        &[
            "verify",
            "adder6.bench",
            "adder6.locked.bench",
            "--key",
            "adder6.key",
        ],
        tmp.path(),
    );
    assert!(ok, "{stdout}");
    assert_eq!(code, Some(0));
    assert!(stdout.contains("PASS"));

    // a flipped bit fails with a counterexample and exit code 1
    let key = std::fs::read_to_string(tmp.path().join("adder6.key")).unwrap();
    let first = key.lines().next().unwrap();
    let (name, bit) = first.split_once('=').unwrap();
    let flipped = key.replacen(
        first,
        &format!("{name}={}", if bit == "0" { 1 } else { 0 }),
        1,
    );
    std::fs::write(tmp.path().join("bad.key"), flipped).unwrap();
    let (ok, stdout, _, code) = run(
        &[
            "verify",
            "adder6.bench",
            "adder6.locked.bench",
            "--key",
            "bad.key",
        ],
        tmp.path(),
    );
    assert!(!ok);
    assert_eq!(code, Some(1));
    assert!(stdout.contains("FAIL") && stdout.contains("counterexample"));
}

#[test]
fn attack_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    run(
        &["lock", "--scheme", "sll", "--keys", "4", "--cluster", "2", "--seed", "5", "adder6.bench"],
        tmp.path(),
    );
    run(&["attack", "adder6.locked.bench", "--out", "a"], tmp.path());
    run(&["attack", "adder6.locked.bench", "--out", "b"], tmp.path());
    let pa = std::fs::read(tmp.path().join("a/adder6.locked.pred")).unwrap();
    let pb = std::fs::read(tmp.path().join("b/adder6.locked.pred")).unwrap();
    assert_eq!(pa, pb);
    // reports differ only in wall-clock fields
    let ja: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("a/adder6.locked.attack.json")).unwrap())
            .unwrap();
    let jb: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("b/adder6.locked.attack.json")).unwrap())
            .unwrap();
    assert_eq!(strip_timing(ja), strip_timing(jb));
}

fn strip_timing(mut v: serde_json::Value) -> serde_json::Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("wall_time_secs");
        o.remove("per_key_secs");
    }
    v
}

#[test]
fn attack_on_unlocked_netlist_warns() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    let (ok, _, stderr, _) = run(&["attack", "adder6.bench"], tmp.path());
    assert!(ok, "exit must still be zero");
    assert!(stderr.contains("warning"));
    let preds = std::fs::read_to_string(tmp.path().join("adder6.pred")).unwrap();
    assert!(preds.is_empty());
}

#[test]
fn eval_emits_csv_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    let (ok, stdout, stderr, _) = run(
        &[
            "eval", "adder6.bench", "--scheme", "rll", "--keys", "3", "--runs", "3",
            "--base-seed", "2",
        ],
        tmp.path(),
    );
    assert!(ok, "stdout: {stdout} stderr: {stderr}");
    let csv = std::fs::read_to_string(tmp.path().join("adder6.rll.csv")).unwrap();
    assert!(csv.starts_with("# gatelock-eval-v1\n"));
    assert_eq!(csv.lines().count(), 2 + 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("adder6.rll.json")).unwrap())
            .unwrap();
    // aggregates recomputable from rows
    let rows = json["rows"].as_array().unwrap();
    let mean: f64 = rows.iter().map(|r| r["sr"].as_f64().unwrap()).sum::<f64>() / rows.len() as f64;
    assert!((mean - json["aggregates"]["sr_mean"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(json["spec"]["benchmark"], "adder6.bench");
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    adder_bench(tmp.path());
    let (_, _, _, code) = run(&["lock", "--scheme", "rll", "adder6.bench"], tmp.path());
    assert_eq!(code, Some(2), "missing --keys is a usage error");
    let (_, _, _, code) = run(&["lock", "--scheme", "bogus", "x.bench"], tmp.path());
    assert_eq!(code, Some(2));
    let (_, _, _, code) = run(
        &["verify", "adder6.bench", "missing.bench", "--key", "nope.key"],
        tmp.path(),
    );
    assert_eq!(code, Some(2));
}

#[test]
fn gen_produces_parseable_standins() {
    let tmp = tempfile::tempdir().unwrap();
    let (ok, stdout, _, _) = run(&["gen", "c880", "--out", "c880.bench"], tmp.path());
    assert!(ok, "{stdout}");
    let n = gatelock::bench::parse_bench_file(tmp.path().join("c880.bench")).unwrap();
    assert!(n.num_logic_gates() > 300);
}
