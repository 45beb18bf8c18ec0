use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tentlim"));
    c.env_remove("TENTLIM_PRECISION_BITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn tentlim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/schemas")
        .join(format!("{}.schema.json", name));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e));
    let v: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap_or_else(|e| panic!("{} does not compile: {}", name, e))
}

fn assert_valid(name: &str, text: &str) {
    let v: Value = serde_json::from_str(text).unwrap_or_else(|e| panic!("{}: not json: {}\n{}", name, e, text));
    let s = schema(name);
    if let Err(errs) = s.validate(&v) {
        let msgs: Vec<String> = errs.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{} output fails its schema:\n{}\n{}", name, msgs.join("\n"), text);
    };
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tentlim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn kappa_of_three_halves() {
    let o = run(&["kappa", "--slope", "3/2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "{\"kappa\": 7}\n");
}

#[test]
fn distinguish_identical_slopes() {
    let o = run(&["distinguish", "--slope", "3/2", "--slope2", "3/2", "--max-depth", "40"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "{\"result\": null}\n");
}

#[test]
fn distinguish_different_slopes() {
    let o = run(&["distinguish", "--slope", "3/2", "--slope2", "8/5", "--max-depth", "40"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["result"]["n"].as_u64().unwrap() >= 2);
    assert_valid("distinguish", &stdout(&o));
}

#[test]
fn lemma_suite_passes() {
    let o = run(&["verify", "--slope", "3/2", "--suite", "lemmas", "--max-i", "20", "--max-n", "12"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["lattice"]["all_pass"], true);
    assert_valid("verify-lemmas", &stdout(&o));
}

#[test]
fn every_subcommand_matches_its_schema() {
    let cases: &[(&str, &[&str])] = &[
        ("orbit", &["orbit", "--slope", "3/2", "--depth", "12"]),
        ("orbit", &["orbit", "--slope", "sqrt3", "--depth", "6", "--precision-bits", "64"]),
        ("kappa", &["kappa", "--slope", "8/5"]),
        ("delta", &["delta", "--slope", "3/2"]),
        ("pattern", &["pattern", "--slope", "3/2", "--depth", "4"]),
        ("pattern", &["pattern", "--slope", "3/2", "--depth", "3", "--window", "2/5,3/5"]),
        ("realize", &["realize", "--slope", "3/2", "--pattern", "1,3,1"]),
        ("arcs", &["arcs", "--slope", "3/2", "--max-i", "10"]),
        ("chain", &["chain", "--slope", "3/2", "--k", "3"]),
        ("symmetry", &["symmetry", "--slope", "3/2", "--depth", "2", "--eps", "1/10"]),
        ("symmetry", &["symmetry", "--slope", "3/2", "--depth", "4", "--eps", "1/1000", "--center", "1/2"]),
        ("symmetry", &["symmetry", "--slope", "3/2", "--depth", "3", "--eps", "1/10", "--compare-depth", "3"]),
        ("verify-symmetry", &["verify", "--slope", "3/2", "--suite", "symmetry", "--max-n", "6", "--grid", "20"]),
        (
            "verify-completeness",
            &["verify", "--slope", "3/2", "--suite", "completeness", "--max-n", "6", "--grid", "20"],
        ),
        ("verify-completeness", &["verify", "--slope", "3/2", "--suite", "completeness", "--eps", "1/20"]),
        ("verify-lemma12", &["verify", "--slope", "3/2", "--suite", "lemma12", "--eps", "1/100", "--max-n", "3"]),
        ("invariant", &["invariant", "--slope", "3/2", "--max-depth", "10"]),
        ("invariant", &["invariant", "--slope", "2", "--max-depth", "6"]),
        ("distinguish", &["distinguish", "--slope", "3/2", "--slope2", "3/2"]),
        ("count", &["count", "--slope", "3/2", "--k", "2", "--level", "8"]),
    ];
    for (name, args) in cases {
        let o = run(args);
        assert!(code(&o) <= 1, "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
        assert_valid(name, &stdout(&o));
    }
}

#[test]
fn errors_are_json_on_stderr() {
    for (args, expect) in [
        (&["kappa", "--slope", "x"][..], 2),
        (&["kappa", "--slope", "1/2"][..], 2),
        (&["orbit", "--slope", "3/2", "--depth", "0"][..], 2),
        (&["arcs", "--slope", "3/2", "--max-i", "4"][..], 2),
        (&["kappa"][..], 2),
        (&["distinguish", "--slope", "3/2"][..], 2),
        (&["pattern", "--slope", "3/2", "--window", "1/2"][..], 2),
        (&["orbit", "--slope", "3/2", "--depth", "5"][..], 1),
        (&["pattern", "--slope", "golden", "--depth", "3"][..], 3),
    ] {
        let o = run(args);
        assert_eq!(code(&o), expect, "{:?}", args);
        assert!(o.stdout.is_empty());
        assert_valid("error", String::from_utf8_lossy(&o.stderr).trim());
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&run(&["kappa", "--slope", "3/2", "--bogus"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--slope", "3/2", "--suite", "nope"])), 2);
}

#[test]
fn failed_verification_exits_one() {
    // At slope 2 the critical orbit is preperiodic and the chain walk is degenerate.
    let o = run(&["verify", "--slope", "2", "--suite", "completeness", "--k", "4", "--eps", "1/100"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    assert_valid("verify-completeness", &stdout(&o));

    let o = run(&["realize", "--slope", "3/2", "--pattern", "5", "--max-depth", "3"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "{\"result\": null}\n");
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["orbit", "--slope", "3/2", "--depth", "30"][..],
        &["verify", "--slope", "3/2", "--suite", "symmetry", "--max-n", "6", "--grid", "20"][..],
        &["verify", "--slope", "3/2", "--suite", "lemma12", "--eps", "1/100", "--max-n", "4"][..],
        &["arcs", "--slope", "8/5", "--max-i", "12", "--format", "csv"][..],
        &["pattern", "--slope", "3/2", "--depth", "6", "--format", "plotdata"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), 0, "{:?}", args);
        assert_eq!(a.stdout, b.stdout, "{:?}", args);
    }
}

#[test]
fn csv_and_plotdata() {
    let o = run(&["orbit", "--slope", "3/2", "--depth", "3", "--format", "csv"]);
    assert_eq!(code(&o), 1, "kappa = 7 is beyond depth 3");
    let o = run(&["orbit", "--slope", "3/2", "--depth", "7", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().take(3).collect::<Vec<_>>(), ["i,c_i", "1,3/4", "2,3/8"]);

    let o = run(&["pattern", "--slope", "3/2", "--depth", "1", "--format", "plotdata"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("# T^1 on the window\n# x y\n"));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let mut it = l.split(' ').map(|t| t.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows, [(0.375, 0.5625), (0.5, 0.75), (0.75, 0.375)]);

    assert_eq!(code(&run(&["kappa", "--slope", "3/2", "--format", "plotdata"])), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let path = tmp("run.conf");
    std::fs::write(&path, "# budgets\nslope = 3/2\nmax-i = 20\nmax_n = 12\nsuite = lemmas\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = run(&["verify", "--config", p]);
    let from_flags = run(&["verify", "--slope", "3/2", "--suite", "lemmas", "--max-i", "20", "--max-n", "12"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_flags.stdout);

    let o = run(&["kappa", "--config", p, "--slope", "8/5"]);
    assert_eq!(stdout(&o), "{\"kappa\": 5}\n");

    std::fs::write(&path, "slope 3/2\n").unwrap();
    assert_eq!(code(&run(&["kappa", "--config", p])), 2);
    assert_eq!(code(&run(&["kappa", "--config", "/nonexistent/tentlim.conf"])), 2);
}

#[test]
fn precision_from_env_and_flag() {
    let bits = |o: &Output| -> u64 {
        let v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v["points"][0]["bits"].as_u64().unwrap()
    };
    let args = ["orbit", "--slope", "sqrt3", "--depth", "4"];
    assert_eq!(bits(&run(&args)), 128);
    let env = bin().args(args).env("TENTLIM_PRECISION_BITS", "96").output().unwrap();
    assert_eq!(bits(&env), 96);
    let flag = bin()
        .args(args)
        .args(["--precision-bits", "80"])
        .env("TENTLIM_PRECISION_BITS", "96")
        .output()
        .unwrap();
    assert_eq!(bits(&flag), 80);
    let bad = bin().args(args).env("TENTLIM_PRECISION_BITS", "lots").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn output_flag_writes_file() {
    let path = tmp("kappa.json");
    let o = run(&["kappa", "--slope", "3/2", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "{\"kappa\": 7}\n");
}
