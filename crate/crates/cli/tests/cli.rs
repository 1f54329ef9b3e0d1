use std::path::PathBuf;
use std::process::{Command, Output};

use sprules::spdom::parse_domain_file;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sprules"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_rule_line() {
    let o = run(&["check-rule", "--domain", &data("sp3.spdom"), "--rule", &data("leftpeak.rule")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "SP: yes; dictators: none; range: 3\n");
}

#[test]
fn manipulable_rule_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    let rule = dir.path().join("maxpeak.rule");
    // the second agent's least favourite alternative
    let ranks = ["xyz", "yxz", "yzx", "zyx"];
    let mut text = String::from("alternatives: x y z\n");
    for a in ranks {
        for b in ranks {
            text.push_str(&format!("{a},{b} -> {}\n", &b[2..]));
        }
    }
    std::fs::write(&rule, text).unwrap();
    let o = run(&["check-rule", "--domain", &data("sp3.spdom"), "--rule", rule.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("SP: no; dictators: none; range: 2\n"), "{out}");
    assert!(out.contains("witness: agent 2 at (xyz,xyz) reports"), "{out}");
}

#[test]
fn classify_round_trips_through_files() {
    let o = run(&["classify", "--domain", &data("ex1.spdom")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("when x > y => z > v, z > w"));
    let back = parse_domain_file(&text).unwrap();
    let orig = parse_domain_file(&std::fs::read_to_string(data("ex1.spdom")).unwrap()).unwrap();
    assert_eq!(back.domains(), orig.domains());

    let rev = run(&["classify", "--domain", &data("sp3.spdom"), "--scan", "reversed"]);
    assert!(stdout(&rev).contains("when z > y => y > x"), "{}", stdout(&rev));
}

#[test]
fn count_subrules_json() {
    let o = run(&["count-subrules", "--domain", &data("ex2.spdom"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["response_profiles"].as_array().unwrap().len(), 16);
    assert_eq!(v["product"], "228245070327644160");
    assert_eq!(v["factorization"], "21^2 · 17^3 · 16^2 · 14^2 · 9^4 · 8^2 · 5");
    assert_eq!(v["all_rules"]["digits"], 179);
}

#[test]
fn count_subrules_text_and_oracle() {
    let o = run(&["count-subrules", "--domain", &data("ex1.spdom"), "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("product: 4619228 = 59 · 46^2 · 37"));
    assert!(out.contains("all rules: 5^6400 (4474 digits)"));
    assert!(out.contains("oracle: 0 of 4 rows differ"));
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["count-subrules", "--domain", "ex2.spdom"],
        vec!["partition", "--domain", "ex1.spdom"],
        vec!["search-two-step", "--domain", "sp3.spdom", "--tables"],
        vec!["enumerate-sp", "--domain", "sp3.spdom", "--format", "json"],
    ] {
        let path = data(args[2]);
        let mut a = args.clone();
        a[2] = &path;
        assert_eq!(run(&a).stdout, run(&a).stdout);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("closure.txt");
    let o = run(&["closure", "--domain", &data("sp3.spdom"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("non-conditional: no"));
}

#[test]
fn assignment_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let asg = dir.path().join("leftpeak.assign");
    let o = run(&[
        "decompose",
        "--domain",
        &data("sp3.spdom"),
        "--rule",
        &data("leftpeak.rule"),
        "--emit-assignment",
        asg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("violations: 0"));
    let text = std::fs::read_to_string(&asg).unwrap();
    assert_eq!(text.lines().count(), 4);
    let o = run(&["check-rule", "--domain", &data("sp3.spdom"), "--assignment", asg.to_str().unwrap()]);
    assert_eq!(stdout(&o), "SP: yes; dictators: none; range: 3\n");

    // rule-file references resolve next to the assignment file and must
    // match their block
    std::fs::copy(data("leftpeak.rule"), dir.path().join("lp.rule")).unwrap();
    let single = dir.path().join("one.assign");
    std::fs::write(&single, "{} | {} -> rule lp.rule\n").unwrap();
    let o = run(&["check-rule", "--domain", &data("sp3.spdom"), "--assignment", single.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not defined on its answer blocks"), "{}", stderr(&o));
}

#[test]
fn verify_theorem_default_family() {
    let o = run(&["verify-theorem"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("instances: 361"));
    assert!(out.contains("violations on non-conditional domains: 0"));
    let o = run(&["verify-theorem", "--domain", &data("sp3.spdom")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(conditional domain)"));
}

#[test]
fn parse_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.spdom");
    std::fs::write(&bad, "alternatives x y z\nagent 1 {\n  fix x > q\n}\n").unwrap();
    let o = run(&["closure", "--domain", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.spdom:3:"), "{err}");

    let o = run(&["closure", "--domain", "/nonexistent.spdom"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn guards_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.spdom");
    std::fs::write(&big, "alternatives a b c d e\nagent 1 { universal }\nagent 2 { universal }\n").unwrap();
    let o = run(&["enumerate-sp", "--domain", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("size limit"));

    let o = run(&[
        "check-rule",
        "--domain",
        &data("sp3.spdom"),
        "--rule",
        &data("leftpeak.rule"),
        "--max-profiles",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enumerate_with_range_and_sample() {
    let o = run(&["enumerate-sp", "--domain", &data("sp3.spdom"), "--range", "x,y"]);
    let out = stdout(&o);
    assert!(out.ends_with("SP rules: 6\n"), "{out}");
    let a = run(&["enumerate-sp", "--domain", &data("sp3.spdom"), "--sample", "5", "--seed", "3"]);
    let b = run(&["enumerate-sp", "--domain", &data("sp3.spdom"), "--sample", "5", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 6);
}

#[test]
fn threads_flag() {
    let o = run(&["--threads", "1", "search-two-step", "--domain", &data("sp3.spdom")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SP rules: 24"));
    let o = run(&["search-two-step", "--domain", &data("sp3.spdom"), "--budget", "100"]);
    assert!(stdout(&o).contains("complete: no (budget exhausted)"));
}
