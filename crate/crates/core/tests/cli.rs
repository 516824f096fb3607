//! End-to-end tests of the `mbl` binary: exit codes, CSV/JSON schemas,
//! agreement with the library and byte-identical reruns.

use std::path::Path;
use std::process::{Command, Output};

use mbl::fields::ModelParams;
use mbl::harness::{sample_statistics, Sampler};
use mbl::kernels::{bessel_kernel, khe_series, KHE_TOL};

fn mbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const GEO: [&str; 8] = ["--a", "0.8", "--q", "0.6", "--eta", "1", "--theta", "1"];

#[test]
fn sample_lpp_csv_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let mut args = vec!["sample-lpp", "--model", "geo"];
    args.extend(GEO);
    args.extend(["--n", "1000", "--seed", "7", "--out", path(&out)]);
    let o = mbl(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "sample,value");
    let p = ModelParams::geometric(0.8, 0.6, 1.0, 1.0).unwrap();
    let lib = &sample_statistics(&[Sampler::L1Geo], &p, 1000, 7).unwrap()[0];
    for (k, line) in lines[1..].iter().enumerate() {
        let (idx, v) = line.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), k);
        assert_eq!(v.parse::<f64>().unwrap(), lib[k]);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, threads) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("s{k}.csv"));
        let mut args = vec!["--threads", threads, "sample-lpp", "--sampler", "corner-Burge"];
        args.extend(GEO);
        args.extend(["--rows", "4", "--cols", "5", "--n", "300", "--seed", "11", "--out", path(&out)]);
        assert_eq!(mbl(&args).status.code(), Some(0));
        files.push(std::fs::read(&out).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));

    let report = |k: usize| {
        let (json, csv) = (dir.path().join(format!("r{k}.json")), dir.path().join(format!("r{k}.csv")));
        let o = mbl(&["experiment", "--id", "bijection", "--out", path(&json), "--csv", path(&csv)]);
        assert_eq!(o.status.code(), Some(0));
        (std::fs::read(json).unwrap(), std::fs::read(csv).unwrap())
    };
    assert_eq!(report(0), report(1));
}

#[test]
fn sample_pp_is_a_plane_partition() {
    let mut args = vec!["sample-pp", "--insertion", "burge", "--seed", "3"];
    args.extend(GEO);
    args.extend(["--rows", "3", "--cols", "4"]);
    let o = mbl(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,value"));
    let mut grid = [[0u64; 4]; 3];
    let mut count = 0;
    for line in lines {
        let v: Vec<u64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        grid[v[0] as usize - 1][v[1] as usize - 1] = v[2];
        count += 1;
    }
    assert_eq!(count, 12);
    for i in 0..3 {
        for j in 0..4 {
            assert!(i == 0 || grid[i - 1][j] >= grid[i][j]);
            assert!(j == 0 || grid[i][j - 1] >= grid[i][j]);
        }
    }
}

#[test]
fn kernel_eval_round_trips_library_values() {
    let o = mbl(&["kernel-eval", "--kernel", "bessel", "--alpha", "0", "--x", "1", "--y", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), bessel_kernel(1.0, 2.0, 0.0).unwrap());

    let o = mbl(&["kernel-eval", "--kernel", "khe", "--alpha", "0.5", "--eta", "1", "--theta", "2", "--x", "0.5", "--y", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), khe_series(0.5, 1.0, 0.5, 1.0, 2.0, KHE_TOL).unwrap());
}

#[test]
fn fredholm_vacuum_probability() {
    let o = mbl(&["fredholm", "--kernel", "kd", "--a", "0.9", "--q", "0.4", "--eta", "1", "--theta", "1", "--l", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut product = 1.0f64;
    for n in 1..400 {
        product *= (1.0 - 0.9 * 0.4f64.powi(n)).powi(n);
    }
    assert!((v["value"].as_f64().unwrap() - product).abs() < 1e-8);
}

#[test]
fn constants_json() {
    let o = mbl(&["constants", "--a", "0.25", "--eta", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["c1"].as_f64().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
    assert!((v["c2"].as_f64().unwrap() - 2f64.cbrt()).abs() < 1e-14);
}

#[test]
fn experiment_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("prop1.json");
    std::fs::write(&cfg, r#"{"h": 3, "tolerance": 1e-12}"#).unwrap();
    let o = mbl(&["experiment", "--id", "prop1", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["id"], "prop1");
    assert_eq!(v["params"]["h"], 3);
    assert_eq!(v["pass"], true);
}

#[test]
fn errors_are_json_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"h": 3, "colour": "red"}"#).unwrap();
    let o = mbl(&["experiment", "--id", "prop1", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["exit_code"], 1);
    assert!(e["message"].as_str().unwrap().contains("colour"));

    let o = mbl(&["constants", "--a", "1.5", "--eta", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stderr).is_ok());

    assert_eq!(mbl(&["experiment", "--id", "no-such"]).status.code(), Some(1));
    assert_eq!(mbl(&["--help"]).status.code(), Some(0));
}
