use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsirelson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_builtin() {
    for args in [&["list"][..], &["--list"][..]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for (name, _) in tsirelson_cli::builtins::list() {
            assert!(text.contains(name), "{name} missing");
        }
        for name in ["c1_wrapped_gaussian", "c2_dirac_third", "c3_half_atoms"] {
            assert!(text.contains(name));
        }
    }
}

#[test]
fn classify_csv_has_one_comment_line() {
    let o = run(&["classify", "--builtin", "c3_half_atoms", "--pmax", "8", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# ") && lines[0].contains("case=C3(2)") && lines[0].contains("p_mu=2"));
    assert_eq!(lines.iter().filter(|l| l.starts_with('#')).count(), 1);
    assert_eq!(lines[1], "p,member,zero_factors,tail_log_sum,certified");
    assert_eq!(lines.len(), 2 + 8);
    assert!(lines[2].starts_with("1,false,"));
    assert!(lines[3].starts_with("2,true,0,"));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(run(&["classify"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["--bogus-flag"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\",\n \"tail\": {\"type\": \"iid\", \"law\": {\"type\": \"dirac\", \"x\": [1]}}}").unwrap();
    let o = run(&["classify", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("tail.law.x"), "{err}");

    let invalid = dir.path().join("invalid.json");
    std::fs::write(
        &invalid,
        r#"{"name": "x", "tail": {"type": "iid", "law": {"type": "atoms", "points": [[0, 0.5], ["1/3", 0.6]]}}}"#,
    )
    .unwrap();
    let o = run(&["classify", "--scenario", invalid.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tail.law.points"));
}

#[test]
fn scenario_file_with_several_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"scenarios": [
            {"name": "third", "tail": {"type": "iid", "law": {"type": "dirac", "x": "1/3"}}},
            {"name": "geo", "tail": {"type": "wrapped_gaussian_tail",
                "means": {"rule": "zero"}, "variances": {"rule": "geometric", "c": "1/4", "r": "1/2"}},
             "defaults": {"samples": 2000, "depth": 20}}
        ]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(run(&["classify", "--scenario", p]).status.code(), Some(2));
    let o = run(&["classify", "--scenario", p, "--name", "third"]);
    assert!(stdout(&o).contains("case=C2"));
    let o = run(&["limit", "--scenario", p, "--name", "geo"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("samples=2000"));
}

fn header_names(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    lines.next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn simulate_then_test_from_sample_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["simulate", "--builtin", "c1_wrapped_gaussian", "-n", "5000", "-N", "12", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let chain = dir.path().join("chain.csv");
    let names = header_names(&chain);
    assert_eq!(&names[..4], ["sample", "anchor", "eta_0", "xi_0"]);
    assert_eq!(names.last().unwrap(), "xi_-12");
    let rows = std::fs::read_to_string(&chain).unwrap().lines().count();
    assert_eq!(rows, 2 + 5000);

    let c = chain.to_str().unwrap();
    assert_eq!(run(&["uniformity", "--input", c]).status.code(), Some(0));
    assert_eq!(run(&["independence", "--input", c]).status.code(), Some(0));
    // the anchor column is a point mass: its ECF has modulus one
    let anchored = dir.path().join("anchored.csv");
    let text = std::fs::read_to_string(&chain).unwrap().replace("sample,anchor,eta_0", "sample,eta_0,eta_sim");
    std::fs::write(&anchored, text).unwrap();
    assert_eq!(run(&["uniformity", "--input", anchored.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["buckets", "--input", c]).status.code(), Some(2));
}

#[test]
fn failing_tests_exit_1() {
    // from a fixed anchor at depth 1, eta_0 sits on three grid points only
    let o = run(&["buckets", "--builtin", "c3_eighth_grid", "--anchor", "det:0", "-N", "1", "-n", "2000"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = run(&["measurable", "--builtin", "c3_half_atoms", "-n", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(run(&["measurable", "--builtin", "c1_wrapped_gaussian", "-n", "2000"]).status.code(), Some(2));
}

#[test]
fn plot_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["suite", "--builtin", "c3_half_atoms", "-n", "5000", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for file in ["report.csv", "ecf_decay.csv", "convpower.csv", "histogram.csv"] {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1, "{file}");
    }
    let hist = std::fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 2 + 50);
    let conv = std::fs::read_to_string(dir.path().join("convpower.csv")).unwrap();
    assert!(conv
        .lines()
        .filter(|l| l.starts_with("2,"))
        .all(|l| l.ends_with(",1e0")));

    let o = run(&["convpower", "--builtin", "c1_irrational_atoms"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ConvergesToHaar"));
    let o = run(&["skeleton", "-n", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["centered", "--builtin", "c1_wrapped_gaussian", "-n", "2000", "--format", "csv"]);
    assert!(stdout(&o).starts_with("# centered products"));
}
