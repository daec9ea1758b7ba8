use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn run_in(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .env("WORKBENCH_CACHE_DIR", cache)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox { dir: tempfile::tempdir().unwrap() }
    }

    fn cache(&self) -> std::path::PathBuf {
        self.dir.path().join("cache")
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn run(&self, args: &[&str]) -> Output {
        run_in(&self.cache(), args)
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

#[test]
fn phi_reports_proved_value() {
    let sb = Sandbox::new();
    let out = sb.run(&["phi", "-s", "3", "-t", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["best_size"], 6);
    assert_eq!(v["status"], "proved");
    assert_eq!(v["upper_bound"], 6);
}

#[test]
fn same_argv_gives_identical_bytes() {
    let sb = Sandbox::new();
    for args in [
        &["graphcase", "-s", "4"][..],
        &["sstar", "-s", "3", "-t", "2"],
        &["oracle", "-n", "5", "-k", "2", "-s", "2", "-t", "2"],
        &["build", "thm13", "-s", "3", "-n", "11", "-k", "5"],
    ] {
        let first = sb.run(args);
        let second = sb.run(args);
        let uncached = sb.run(&[args, &["--no-cache"]].concat());
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert_eq!(first.stdout, uncached.stdout, "{args:?}");
    }
}

#[test]
fn corrupt_cache_entries_are_recomputed() {
    let sb = Sandbox::new();
    let fresh = sb.run(&["phi", "-s", "3", "-t", "2", "--witnesses", "all"]);
    let entries: Vec<_> = fs::read_dir(sb.cache()).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!entries.is_empty());
    for p in &entries {
        fs::write(p, "{ truncated").unwrap();
    }
    let again = sb.run(&["phi", "-s", "3", "-t", "2", "--witnesses", "all"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(again.stdout, fresh.stdout);
    assert!(String::from_utf8_lossy(&again.stderr).contains("corrupt"));
}

#[test]
fn truncated_search_exits_two() {
    let sb = Sandbox::new();
    let out = sb.run(&["phi", "-s", "4", "-t", "2", "--budget-nodes", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["status"], "lower_bound_only");
    assert!(v["upper_bound"].as_u64().unwrap() >= 10);
    assert_eq!(sb.run(&["johnson", "-n", "20", "-m", "10"]).status.code(), Some(2));
}

#[test]
fn usage_and_input_errors() {
    let sb = Sandbox::new();
    assert_eq!(sb.run(&["phi", "-s", "3", "-t", "2", "--frobnicate"]).status.code(), Some(64));
    assert_eq!(sb.run(&["nosuch"]).status.code(), Some(64));
    assert_eq!(sb.run(&[]).status.code(), Some(64));
    assert_eq!(sb.run(&["--help"]).status.code(), Some(0));
    assert_eq!(sb.run(&["kk", "--help"]).status.code(), Some(0));
    assert_eq!(sb.run(&["--version"]).status.code(), Some(0));

    assert_eq!(sb.run(&["phi", "-s", "1", "-t", "2"]).status.code(), Some(1));
    assert_eq!(sb.run(&["find", "--family", "/nonexistent/f.txt", "-s", "3"]).status.code(), Some(1));
    let bad = sb.file("bad.txt", "n=4 k=2\n0 9\n");
    assert_eq!(sb.run(&["find", "--family", &bad, "-s", "3"]).status.code(), Some(1));
    assert_eq!(sb.run(&["build", "thm13", "-s", "4", "-n", "20", "-k", "5"]).status.code(), Some(1));
    assert_eq!(sb.run(&["repro", "nosuch"]).status.code(), Some(1));
}

#[test]
fn find_and_verify_round_trip() {
    let sb = Sandbox::new();
    let fam = sb.file("star.txt", "n=6 k=2\n0 1\n0 2\n0 3\n# comment\n");
    let out = sb.run(&["find", "--family", &fam, "-s", "3", "--core", "exact:1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), r#"{"constraint":{"c":1,"kind":"exact"},"core":[0],"members":[[0,1],[0,2],[0,3]],"s":3}"#);
    let cert = sb.file("cert.json", &stdout(&out));
    let v = json(&sb.run(&["verify", "--family", &fam, "--cert", &cert]));
    assert_eq!(v["valid"], true);

    let forged = sb.file("forged.json", r#"{"s":3,"core":[1],"members":[[0,1],[0,2],[0,3]],"constraint":{"kind":"exact","c":1}}"#);
    let v = json(&sb.run(&["verify", "--family", &fam, "--cert", &forged]));
    assert_eq!(v["valid"], false);

    let none = sb.run(&["find", "--family", &fam, "-s", "3", "--core", "exact:0"]);
    assert_eq!(stdout(&none).trim(), r#"{"found":false}"#);
}

#[test]
fn build_and_count_agree() {
    let sb = Sandbox::new();
    let s = sb.file(
        "s.txt",
        "n=12 k=-\n0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n0 1 2\n3 4 5\n",
    );
    let built = sb.run(&["build", "fs", "--s-file", &s, "-n", "12", "-k", "5"]);
    assert_eq!(built.status.code(), Some(0));
    let lines = stdout(&built).lines().count() - 1;
    let counted = sb.run(&["count", "fs", "-n", "12", "-k", "5", "--s-file", &s]);
    assert_eq!(stdout(&counted).trim(), lines.to_string());

    let t = sb.file("t.txt", "n=6 k=2\n0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n");
    let basic = sb.run(&["build", "basic", "--family", &t, "-n", "10", "-k", "5"]);
    assert_eq!(stdout(&basic).lines().count() - 1, 24);
    assert!(stdout(&basic).starts_with("n=10 k=5\n"));
}

#[test]
fn spectral_subcommands() {
    let sb = Sandbox::new();
    let v = json(&sb.run(&["johnson", "-n", "7", "-m", "3", "--lambda2"]));
    assert_eq!(v["vertices"], 35);
    assert_eq!(v["degree"], 12);
    assert!((v["lambda2"].as_f64().unwrap() - 7.0).abs() < 1e-8);
    let fam = sb.file("k.txt", "n=5 k=3\n0 1 2\n0 1 3\n0 2 3\n1 2 3\n");
    let v = json(&sb.run(&["kk", "--family", &fam, "-h", "2"]));
    assert_eq!(v["holds"], true);
    assert_eq!(v["x"], 4.0);
    assert_eq!(v["shadow"], 6);
}

#[test]
fn pretty_output_is_a_table() {
    let sb = Sandbox::new();
    let out = sb.run(&["phi", "-s", "2", "-t", "2", "--pretty"]);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("best_size") && l.trim_end().ends_with('1')));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}

#[test]
fn repro_runs_a_named_scenario() {
    let sb = Sandbox::new();
    let out = sb.run(&["repro", "structural"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_family_files_are_input_errors(body in "[0-9a-z =#{}\n-]{0,40}") {
        let sb = Sandbox::new();
        let path = sb.file("f.txt", &body);
        let out = sb.run(&["find", "--family", &path, "-s", "2"]);
        let code = out.status.code();
        // some random bodies happen to be valid families
        prop_assert!(code == Some(0) || code == Some(1), "exit {:?} for {:?}", code, body);
        if code == Some(1) {
            prop_assert!(out.stdout.is_empty());
        }
    }

    #[test]
    fn unknown_flags_are_usage_errors(flag in "--[a-z]{3,12}") {
        prop_assume!(!["--pretty", "--threads", "--budget-nodes", "--budget-secs", "--no-cache", "--help", "--version"]
            .iter().any(|f| f.starts_with(flag.as_str())));
        let sb = Sandbox::new();
        let out = sb.run(&["phi", "-s", "2", "-t", "1", &flag]);
        prop_assert_eq!(out.status.code(), Some(64));
    }
}
