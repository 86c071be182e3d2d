use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bundle(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bundles").join(name)
}

fn tanbun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanbun"))
        .args(args)
        .env_remove("TANBUN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn passing_bundle_exits_zero() {
    let o = tanbun(&["check", bundle("trivial_line.bundle").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("aggregate: pass"));
}

#[test]
fn failing_bundle_exits_one_and_names_the_critical_point() {
    let path = bundle("bump.bundle");
    let o = tanbun(&["check", path.to_str().unwrap(), "--suite", "rosicky", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let sub = v["suites"][1]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == "SUB-q")
        .expect("SUB-q present")
        .clone();
    assert_eq!(sub["status"], "fail");
    let p = sub["witness"]["point"].as_array().unwrap();
    assert!((p[0].as_f64().unwrap()).abs() < 1e-3 && (p[1].as_f64().unwrap() - 1.0).abs() < 1e-3, "{sub}");
}

#[test]
fn pre_suite_alone_is_a_pass_for_the_bump() {
    let o = tanbun(&["check", bundle("bump.bundle").to_str().unwrap(), "--suite", "pre"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(tanbun(&["check", "/nonexistent.bundle"]).status.code(), Some(3));
    assert_eq!(tanbun(&["frobnicate"]).status.code(), Some(3));
    let path = bundle("trivial_line.bundle");
    let p = path.to_str().unwrap();
    assert_eq!(tanbun(&["check", p, "--depth", "3"]).status.code(), Some(3));
    assert_eq!(tanbun(&["check", p, "--suite", "nope"]).status.code(), Some(3));
    assert_eq!(tanbun(&["corpus", "run", "nope"]).status.code(), Some(3));
    assert_eq!(tanbun(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_files_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.bundle");
    std::fs::write(&path, "name = bad\nbase_dim = 1\ntotal_dim = 2\nq = x0 +\nxi = x0, 0\nlambda = x0, 0, 0, x1\n").unwrap();
    let o = tanbun(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_reports_are_deterministic_apart_from_timing() {
    let path = bundle("sheared_line.bundle");
    let run = || {
        let mut v = json(&tanbun(&["check", path.to_str().unwrap(), "--format", "json", "--depth", "1"]));
        assert!(v["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
        v.as_object_mut().unwrap().remove("wall_clock_seconds");
        v
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a["schema"], 1);
    assert_eq!(a["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let path = bundle("trivial_line.bundle");
    let p = path.to_str().unwrap();
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_tanbun"));
        c.args(["check", p, "--suite", "pre", "--format", "json"]).args(extra);
        match env {
            Some(s) => c.env("TANBUN_SEED", s),
            None => c.env_remove("TANBUN_SEED"),
        };
        json(&c.output().unwrap())["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 42);
    assert_eq!(seed_of(&[], Some("7")), 7);
    assert_eq!(seed_of(&["--seed", "9"], Some("7")), 9);
}

#[test]
fn corpus_lists_and_runs_entries() {
    let list = stdout(&tanbun(&["corpus", "list"]));
    for name in ["trivial_1_1", "bump_counterexample", "scaling_morphism_nonidempotent", "mutant_scalar_cubed"] {
        assert!(list.contains(name), "{name} missing from\n{list}");
    }
    // an entry expected to fail exits 0 when it fails as intended
    let o = tanbun(&["corpus", "run", "mutant_lift_doubled"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("expectation met"));
    let o = tanbun(&["corpus", "run", "scaling_morphism_nonidempotent", "--format", "json"]);
    assert_eq!(json(&o)[0]["met"], true);
}
