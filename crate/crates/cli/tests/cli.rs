use std::process::{Command, Output};

use interlace::harness::read_records;
use interlace::interlacement::InterlacementSample;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interlace")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_laplace_at_zero_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    std::fs::write(&cfg, "suite = laplace\ns = 0\nsamples = 50\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_records(&stdout(&o)).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].estimate, 1.0);
    assert!(recs[0].pass);
}

#[test]
fn empty_suite_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    let out = dir.path().join("out.jsonl");
    std::fs::write(&cfg, "suite =\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(out).unwrap().is_empty());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "u = 1\ncolour = blue\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(run(&["verify", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    std::fs::write(&cfg, "suite = laplace, green_harmonicity\ns = 0\nsamples = 20\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("experiment,label,estimate"));
}

#[test]
fn capacity_of_a_point_and_a_file_set() {
    let o = run(&["capacity", "--radius", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let cap = v["capacity"].as_f64().unwrap();
    assert!((cap - 1.0 / 1.516386059151979).abs() < 1e-9, "{cap}");

    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("pair.txt");
    std::fs::write(&set, "# two neighbours\n0 0 0\n1,0,0\n").unwrap();
    let o = run(&["capacity", "--set", set.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["measure"].as_array().unwrap().len(), 2);
    std::fs::write(&set, "0 0\n").unwrap();
    assert_eq!(run(&["capacity", "--set", set.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simulate_exports_samples() {
    let o = run(&["simulate", "--u", "0.5", "--radius", "2", "--samples", "3", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let samples: Vec<InterlacementSample> = text.lines().map(|l| InterlacementSample::from_json(l).unwrap()).collect();
    assert_eq!(samples.len(), 3);
    assert!(samples.iter().all(|s| s.window.radius == 2 && s.u == 0.5));
    assert_eq!(text, stdout(&run(&["simulate", "--u", "0.5", "--radius", "2", "--samples", "3", "--seed", "9"])));
}

#[test]
fn classify_emits_boxes_and_report() {
    let o = run(&["classify", "--u", "0.3", "--radius", "8", "--k", "1", "--l", "2", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["h_report"]["holds"], serde_json::Value::Bool(true));
    assert_eq!(text.lines().count(), 27 + 1);
}
