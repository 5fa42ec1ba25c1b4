// The `fronthaul` binary end to end: exit codes and output files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fronthaul")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_reference_is_schedulable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", scenario("reference.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("aggregation bound 1186667ps"), "{text}");
    assert!(text.contains("verdict: schedulable"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    assert_eq!(json["aggregation_bound"]["total"], 1_186_667);
    assert_eq!(json["report"]["schedulable"], true);
}

#[test]
fn analyze_infeasible_exits_one() {
    let o = run(&["analyze", scenario("infeasible.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("d' = -246667 ps"));
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let thin = std::fs::read_to_string(scenario("reference.toml"))
        .unwrap()
        .replace(r#"["10Gbps", "40Gbps", "200Gbps"]"#, r#"["10Gbps", "20Gbps", "200Gbps"]"#);
    let path = dir.path().join("thin.toml");
    std::fs::write(&path, thin).unwrap();
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("violation: Fat-Tree"));
    // the other commands refuse the file outright
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["validate", scenario("reference.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[topology]\narity = 2\n").unwrap();
    assert_eq!(run(&["analyze", path.to_str().unwrap()]).status.code(), Some(2));
    let unitless = std::fs::read_to_string(scenario("reference.toml")).unwrap().replace(r#""50ns""#, r#""50""#);
    std::fs::write(&path, unitless).unwrap();
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("topology.switching_delay"));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_a_runtime_error() {
    assert_eq!(run(&["analyze", "/nonexistent/scenario.toml"]).status.code(), Some(3));
}

#[test]
fn simulate_writes_csv_with_schema_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", scenario("fifo_pair.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("flows_fifo_q1_rep0.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema: flow_id,rate_bps,max_delay_ps,min_delay_ps,jitter_ps,misses,packets");
    assert!(lines[1].starts_with("# scenario ") && lines[1].contains(" seed 0 fronthaul "));
    assert_eq!(lines[2], "flow_id,rate_bps,max_delay_ps,min_delay_ps,jitter_ps,misses,packets");
    assert_eq!(lines[4], "1,2666666667,3000000,2000000,1000000,0,4");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["max_delay_ps"], 3_000_000);
    assert_eq!(summary["runs"][0]["analytic_schedulable"], serde_json::Value::Null);
}

#[test]
fn simulate_overrides_horizon_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        scenario("reference.toml").to_str().unwrap(),
        "--horizon",
        "50us",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r["horizon_ps"] == 50_000_000 && r["seed"] == 9));
    assert_eq!(runs[0]["analytic_schedulable"], true);
    assert_eq!(
        run(&["simulate", scenario("reference.toml").to_str().unwrap(), "--horizon", "0s"]).status.code(),
        Some(2)
    );
}

#[test]
fn optimize_agrees_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["optimize", scenario("adc_search.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("oracle: match"));
    let search: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("search.json")).unwrap()).unwrap();
    assert_eq!(search["oracle"]["match"], true);
    let lattice = std::fs::read_to_string(dir.path().join("lattice.csv")).unwrap();
    assert!(lattice.starts_with("# schema: q,schedulable,capacity_bps_hz\n# scenario "));
    // a scenario without an optimization section is an input error
    assert_eq!(run(&["optimize", scenario("reference.toml").to_str().unwrap()]).status.code(), Some(2));
}
