use std::fs;
use std::path::Path;

use netcascade_cli::{run_with, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("netcascade").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn two_firm(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("two.json");
    let net = r#"{"n":2,"m":2,"C":[[0.0,0.5],[0.5,0.0]],"D":[[1.0,0.0],[0.0,1.0]],
        "p":[1.0,0.5],"theta":[0.8,0.9],"beta":[0.3,0.3],"labels":["a","b"]}"#;
    fs::write(&path, net).unwrap();
    path
}

#[test]
fn build_fixture_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    let summary = ok_json(&["build", "--fixture", "--out", s(&net)]);
    assert_eq!(summary["firms"], 3);
    assert_eq!(summary["baseline_defaults"], 0);
    let data: Value = serde_json::from_str(&fs::read_to_string(&net).unwrap()).unwrap();
    for key in ["n", "m", "C", "D", "p", "theta", "beta", "labels"] {
        assert!(data.get(key).is_some(), "{key}");
    }
    let solved = ok_json(&["solve", "--net", s(&net)]);
    assert_eq!(solved["defaults"], 0);
}

#[test]
fn build_from_csv_and_zero_beta() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    ok_json(&["gen-fixture", "--sectors", "12", "--seed", "4", "--out", s(&csv)]);
    let net = dir.path().join("net.json");
    ok_json(&["build", "--input", s(&csv), "--out", s(&net), "--beta-factor", "0"]);
    let data: Value = serde_json::from_str(&fs::read_to_string(&net).unwrap()).unwrap();
    assert!(data["beta"].as_array().unwrap().iter().all(|b| b.as_f64() == Some(0.0)));
}

#[test]
fn bad_csv_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "sector,A,B\nA,1,x\n").unwrap();
    let (code, _, err) = run(&["build", "--input", s(&csv), "--out", s(&dir.path().join("n.json"))]);
    assert_eq!(code, EXIT_INPUT, "{err}");
    let (code, _, _) = run(&["solve", "--net", s(&dir.path().join("missing.json"))]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = run(&["solve"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn two_firm_cascade_and_rescue() {
    let dir = tempfile::tempdir().unwrap();
    let net = two_firm(dir.path());
    let best = ok_json(&["solve", "--net", s(&net)]);
    assert_eq!(best["failed"], serde_json::json!(["a", "b"]));
    let worst = ok_json(&["solve", "--net", s(&net), "--mode", "worst", "--per-firm"]);
    assert_eq!(worst["defaults"], 2);
    assert_eq!(worst["per_firm"].as_array().unwrap().len(), 2);

    let plan = ok_json(&["intervene", "--net", s(&net), "--budget", "1", "--absolute", "--algo", "brute-frac"]);
    assert_eq!(plan["defaults_after"], 0);
    let empty = ok_json(&["intervene", "--net", s(&net), "--budget", "0"]);
    assert_eq!(empty["defaults_after"], 2);
    assert_eq!(empty["plan"]["spent"], 0.0);
}

#[test]
fn shock_file_rows() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    ok_json(&["build", "--fixture", "--out", s(&net)]);
    let shock = dir.path().join("shock.csv");
    fs::write(&shock, "gross_0,gross_1,gross_2\n1,1,1\n0.2,0.2,0.2\n").unwrap();
    assert_eq!(ok_json(&["solve", "--net", s(&net), "--shock", s(&shock)])["defaults"], 0);
    assert_eq!(ok_json(&["solve", "--net", s(&net), "--shock", s(&shock), "--row", "1"])["defaults"], 3);
    fs::write(&shock, "a,b\n1,1\n").unwrap();
    assert_eq!(run(&["solve", "--net", s(&net), "--shock", s(&shock)]).0, EXIT_INPUT);
}

#[test]
fn gadget_and_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("g.json");
    let g = ok_json(&["gadget", "--vertices", "3", "--edges", "0-1", "--k", "2", "--out", s(&net)]);
    let budget = g["budget"].as_f64().unwrap().to_string();
    let r = ok_json(&["intervene", "--net", s(&net), "--budget", &budget, "--absolute", "--algo", "brute"]);
    let saved = r["defaults_before"].as_u64().unwrap() - r["defaults_after"].as_u64().unwrap();
    assert!(saved >= g["target"].as_u64().unwrap());
    let (code, _, _) = run(&["gadget", "--vertices", "3", "--edges", "0-0", "--k", "1", "--out", s(&net)]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn maxshock_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    ok_json(&["build", "--fixture", "--out", s(&net)]);
    let none = ok_json(&["maxshock", "--net", s(&net), "--budget", "0", "--exact"]);
    assert_eq!(none["assets"].as_array().unwrap().len(), 0);
    let all = ok_json(&["maxshock", "--net", s(&net), "--budget", "1"]);
    assert_eq!(all["defaults"], 3);
    for b in ["0.2", "0.4", "0.6"] {
        let exact = ok_json(&["maxshock", "--net", s(&net), "--budget", b, "--exact"]);
        let greedy = ok_json(&["maxshock", "--net", s(&net), "--budget", b, "--heuristic", "discount"]);
        assert!(greedy["defaults"].as_u64() <= exact["defaults"].as_u64());
    }
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn stress_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    ok_json(&["gen-fixture", "--sectors", "30", "--seed", "2", "--out", s(&csv)]);
    let net = dir.path().join("net.json");
    ok_json(&["build", "--input", s(&csv), "--out", s(&net)]);
    let out_dir = dir.path().join("out");
    let summary = ok_json(&[
        "stress", "--net", s(&net), "--scenarios", "10", "--budgets", "0,0.005,0.02", "--out-dir", s(&out_dir),
        "--seed", "3",
    ]);
    assert_eq!(summary["scenarios"], 10);
    for f in ["defaults.csv", "tvar.csv", "hist_defaults.csv", "hist_2d.csv", "hist_averted.csv", "scenarios.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let defaults = read_rows(&out_dir.join("defaults.csv"));
    assert_eq!(defaults.len(), 10);
    let scen = dir.path().join("out/scenarios.csv");
    for (row, d) in defaults.iter().enumerate() {
        let cols: Vec<f64> = d[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert!(cols.windows(2).all(|w| w[1] <= w[0]));
        let solved = ok_json(&["solve", "--net", s(&net), "--shock", s(&scen), "--row", &row.to_string()]);
        let n = solved["firms"].as_f64().unwrap();
        assert_eq!(solved["defaults"].as_f64().unwrap() / n, cols[0]);
    }
    let tvar = fs::read_to_string(out_dir.join("tvar.csv")).unwrap();
    assert!(tvar.lines().nth(1).unwrap() == "q,budget,tvar,reduction_pct");
}

#[test]
fn stress_without_scenarios_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    ok_json(&["build", "--fixture", "--out", s(&net)]);
    let (code, _, _) =
        run(&["stress", "--net", s(&net), "--scenarios", "0", "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(code, EXIT_INFEASIBLE);
}

#[test]
fn intervene_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    ok_json(&["build", "--fixture", "synthetic200", "--out", s(&net)]);
    let shock = dir.path().join("shock.csv");
    let header: Vec<String> = (0..200).map(|i| format!("gross_{i}")).collect();
    let row: Vec<String> = (0..200).map(|i| format!("{}", 0.6 + 0.002 * i as f64)).collect();
    fs::write(&shock, format!("{}\n{}\n", header.join(","), row.join(","))).unwrap();
    let args = |threads: &'static str, out: &Path| {
        vec![
            "--threads".to_string(), threads.into(), "intervene".into(), "--net".into(), s(&net).into(),
            "--shock".into(), s(&shock).into(), "--algo".into(), "greedy-frac".into(), "--band".into(), "0.3".into(),
            "--replicates".into(), "20".into(), "--seed".into(), "9".into(), "--out".into(), s(out).into(),
        ]
    };
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let mut sink = Vec::new();
    assert_eq!(run_with(std::iter::once("netcascade".to_string()).chain(args("1", &a)), &mut sink, &mut Vec::new()), 0);
    assert_eq!(run_with(std::iter::once("netcascade".to_string()).chain(args("4", &b)), &mut sink, &mut Vec::new()), 0);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}
