//! Runs the `nnscit` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nnscit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnscit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path, family: &str, hypothesis: &str, n: usize, d_z: usize, seed: u64) -> String {
    let path = dir.join(format!("{family}-{hypothesis}-{seed}.csv"));
    let path = path.to_str().unwrap().to_string();
    let n = n.to_string();
    let d_z = d_z.to_string();
    let seed = seed.to_string();
    let out = nnscit(&[
        "generate", "--family", family, "--hypothesis", hypothesis, "--n", &n, "--d-z", &d_z, "--seed", &seed,
        "--output", &path,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn decision(csv: &str, seed: u64) -> serde_json::Value {
    let record = format!("{csv}.json");
    let out = nnscit(&["test", csv, "--m", "100", "--seed", &seed.to_string(), "--output", &record]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&fs::read_to_string(&record).unwrap()).unwrap()
}

#[test]
fn result_record_has_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate(dir.path(), "postnonlinear-I", "H0", 300, 3, 1);
    let out = nnscit(&["test", &csv, "--m", "19", "--variant", "eq7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for label in ["p-value", "statistic", "decision", "variant", "wall time"] {
        assert!(text.contains(label), "{text}");
    }
    // default record path sits next to the input
    let record = dir.path().join("postnonlinear-I-H0-1.result.json");
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(record).unwrap()).unwrap();
    for key in [
        "p_value", "statistic", "null_stats", "decision", "variant", "seed", "wall_time_ms", "m", "k", "alpha",
        "n", "d_z",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["null_stats"].as_array().unwrap().len(), 19);
    assert_eq!(value["variant"], "eq7");
    assert_eq!(value["n"], 300);
}

#[test]
fn collider_is_rejected_and_chain_is_not() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..2 {
        let collider = generate(dir.path(), "collider-example-2", "H1", 600, 5, seed);
        assert_eq!(decision(&collider, seed)["decision"], "reject-H0");
        let chain = generate(dir.path(), "chain-example-1", "H0", 600, 5, seed);
        assert_eq!(decision(&chain, seed)["decision"], "accept-H0");
    }
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y,z1\n0,1,2\n0,abc,2\n").unwrap();
    let out = nnscit(&["test", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("abc") || err.contains("row"), "{err}");

    let missing = nnscit(&["test", dir.path().join("absent.csv").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let csv = generate(dir.path(), "postnonlinear-I", "H0", 120, 2, 0);
    assert_eq!(nnscit(&["test", &csv, "--variant", "eq9"]).status.code(), Some(2));
    assert_eq!(nnscit(&["test", &csv, "--m", "0"]).status.code(), Some(2));
    assert_eq!(nnscit(&["test", &csv, "--bogus"]).status.code(), Some(2));
}

#[test]
fn gof_writes_a_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gof.csv");
    let out = nnscit(&[
        "gof", "--family", "gof-2", "--d-z", "5", "--reference", "200", "--query", "200", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_left,bin_right,count_generated,count_true"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows.iter().map(|r| r[2]).sum::<f64>(), 200.0);
    assert_eq!(rows.iter().map(|r| r[3]).sum::<f64>(), 200.0);
    assert_eq!(nnscit(&["gof", "--family", "chain-example-1"]).status.code(), Some(2));
}

#[test]
fn bench_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let config = dir.path().join("sweep.toml");
    fs::write(
        &config,
        format!(
            "seed = 3\nreplications = 2\noutput_dir = {:?}\nd_z = [2]\n\n[scenario]\nfamily = \"postnonlinear-I\"\nhypothesis = \"H0\"\nn = 150\n\n[test]\nm = 9\nvariant = \"eq7\"\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = nnscit(&["bench", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);

    fs::write(dir.path().join("typo.toml"), "seed = 1\n[test]\nrepeats = 3\n").unwrap();
    let bad = nnscit(&["bench", dir.path().join("typo.toml").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("test.repeats"));
}

#[test]
fn timing_reports_both_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("timing.csv");
    let out = nnscit(&["timing", "--grid", "3", "--n", "300", "--m", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().contains("ratio"));
}
