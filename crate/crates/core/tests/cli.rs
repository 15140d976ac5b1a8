use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeronet-ctr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const CHAIN: &str = r#"{
  "area": {"w": 30, "h": 30},
  "anps": [
    {"label": "west", "center": [0, 0], "orbit_radius": 0, "omega_rad_per_hour": 0},
    {"center": [10, 0], "orbit_radius": 0, "omega_rad_per_hour": {"num": 0, "den": 1}},
    {"center": [20, 0], "orbit_radius": 0, "omega_rad_per_hour": {"num": 0, "den": 1}}
  ]
}"#;

#[test]
fn check_reports_connectivity_with_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "chain.json", CHAIN);
    let ok = cli(&["check", "--scenario", &s, "--tr", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["connected"], Value::Bool(true));
    let split = cli(&["check", "--scenario", &s, "--tr", "9"]);
    assert_eq!(split.status.code(), Some(2));
    assert_eq!(json(&split)["disconnection"]["components"].as_array().unwrap().len(), 3);
}

#[test]
fn ctr_family_reports() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "chain.json", CHAIN);
    let ctr = cli(&["ctr", "--scenario", &s, "--err", "0.01"]);
    assert_eq!(ctr.status.code(), Some(0));
    let v = json(&ctr)["ctr"].as_f64().unwrap();
    assert!((10.0..=10.01).contains(&v));

    let f = cli(&["ctrf", "--scenario", &s, "--region-radius", "1", "--err", "0.01"]);
    assert_eq!(f.status.code(), Some(0));
    let report = json(&f);
    assert!((20.0..=20.01).contains(&report["ctr_f"].as_f64().unwrap()));
    assert_eq!(report["binding"]["fault_point"]["kind"], "node_center");
    assert_eq!(report["binding"]["fault_point"]["i"], 1);

    let d = cli(&["ctrd", "--scenario", &s, "--delay", "0", "--all-starts"]);
    assert_eq!(d.status.code(), Some(0));
    let report = json(&d);
    assert!((10.0..=10.01).contains(&report["ctr_d"].as_f64().unwrap()));
    assert_eq!(report["starts"][0]["feasible"], Value::Bool(false));
}

#[test]
fn infeasible_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let tight = CHAIN.replace(r#""w": 30, "h": 30"#, r#""w": 5, "h": 5"#);
    let s = write(dir.path(), "tight.json", &tight);
    let out = cli(&["ctr", "--scenario", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"area": {"w": 10, "h": 10}, "anps": [{"center": [0, 0]}]}"#);
    let out = cli(&["ctr", "--scenario", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("anps[0]"));
    let missing = cli(&["ctr", "--scenario", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(1));
    let chain = write(dir.path(), "chain.json", CHAIN);
    let negative = cli(&["ctr", "--scenario", &chain, "--err=-1"]);
    assert_eq!(negative.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&negative.stderr).contains("err must be positive"));
    assert_eq!(cli(&["ctr"]).status.code(), Some(1));
}

#[test]
fn timeline_formats() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "chain.json", CHAIN);
    let csv = cli(&["timeline", "--scenario", &s, "--tr", "15", "--out", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "time,kind,i,j");
    assert_eq!(lines[1], "0,horizon_start,,");
    assert_eq!(&lines[2..4], &["0,link_up,0,1", "0,link_up,1,2"]);
    assert_eq!(lines[4], "1,horizon_end,,");
    let js = cli(&["timeline", "--scenario", &s, "--tr", "15", "--out", "json"]);
    assert_eq!(json(&js)["node_count"], 3);
}

#[test]
fn gen_is_deterministic_and_parses_back() {
    let args = ["gen", "--n", "12", "--orbit-radius", "10", "--omega", "20", "--seed", "42"];
    let a = cli(&args);
    let b = cli(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["anps"].as_array().unwrap().len(), 12);
    assert_eq!(doc["area"]["w"], 1000.0);

    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "gen.json", &String::from_utf8(a.stdout).unwrap());
    assert_eq!(cli(&["ctr", "--scenario", &s]).status.code(), Some(0));

    let pi = cli(&["gen", "--n", "2", "--orbit-radius", "5", "--omega", "1/2pi", "--width", "100", "--height", "100"]);
    assert_eq!(json(&pi)["anps"][0]["omega_rad_per_hour"]["pi_factor"], true);
    let packed = cli(&["gen", "--n", "500", "--orbit-radius", "10", "--omega", "20", "--width", "50", "--height", "50"]);
    assert_eq!(packed.status.code(), Some(1));
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.json",
        r#"{
          "sweep": "node_count", "values": [4, 6], "trials_per_value": 2, "rng_seed": 3,
          "base": {"node_count": 4, "orbit_radius": 10, "omega": {"num": 20, "den": 1},
                   "region_radius": 20, "delay_periods": 0.5, "area": {"w": 300, "h": 300},
                   "err": 0.05},
          "metrics": [{"metric": "ctr"}, {"metric": "ctr_f", "region_radius": 30}, {"metric": "ctr_d"}]
        }"#,
    );
    let out = dir.path().join("out.csv");
    let trials = dir.path().join("trials.csv");
    let run = cli(&[
        "experiment",
        "--plan",
        &plan,
        "--out",
        out.to_str().unwrap(),
        "--trials-out",
        trials.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "value,metric,mean,stddev,trials,infeasible");
    assert_eq!(lines.len(), 7);
    assert!(lines[2].starts_with("4.0,ctr_f(R=30),"));
    let trial_lines = fs::read_to_string(&trials).unwrap().lines().count();
    assert_eq!(trial_lines, 1 + 2 * 2 * 3);
}
