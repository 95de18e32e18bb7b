use std::path::PathBuf;
use std::process::{Command, Output};

use jackratio::esym::EPolynomial;
use jackratio::jack::e_to_jack;
use jackratio::rational::{format_rational, int, parse_rational};
use jackratio::Partition;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jackratio"))
        .args(args)
        .env_remove("JACKRATIO_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jackratio-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn product_example() {
    let out = stdout(&["jack", "product", "--left", "5", "--right", "1", "--beta", "1", "--m", "2", "--format", "json"]);
    assert_eq!(out.trim(), r#"{"6":"1","5,1":"5/27"}"#);
    let csv = stdout(&["jack", "product", "--left", "2,1", "--right", "2", "--beta", "1", "--m", "2"]);
    assert_eq!(csv, "delta,coefficient\n\"4,1\",27/50\n\"3,2\",28/75\n");
}

#[test]
fn expand_round_trips() {
    for (kappa, beta, m) in [("2,1,1", "1", "4"), ("3,1", "3/7", "3"), ("4", "2", "2")] {
        let out = json(&["jack", "expand", "--partition", kappa, "--beta", beta, "--m", m, "--format", "json"]);
        let map = out.as_object().unwrap();
        let m: usize = m.parse().unwrap();
        let terms = map.iter().map(|(k, v)| {
            (k.parse::<Partition>().unwrap(), parse_rational(v.as_str().unwrap()).unwrap())
        });
        let poly = EPolynomial::from_terms(m, terms).unwrap();
        for (k, v) in map {
            let mu: Partition = k.parse().unwrap();
            assert_eq!(format_rational(&poly.coefficient(&mu)), v.as_str().unwrap());
        }
        let back = e_to_jack(&poly, &parse_rational(beta).unwrap()).unwrap();
        let kappa: Partition = kappa.parse().unwrap();
        assert_eq!(back.terms().len(), 1);
        assert_eq!(back.coefficient(&kappa), int(1));
    }
}

#[test]
fn lb_row() {
    let out = json(&["lb-row", "--partition", "1,1", "--beta", "1", "--m", "2", "--format", "json"]);
    assert!(out.as_object().unwrap().contains_key("1,1"));
}

#[test]
fn table1_series_column() {
    let out = json(&["dist", "table1", "--variant", "a", "--reps", "0", "--format", "json"]);
    let printed = [0.389, 0.509, 0.759, 0.888, 0.917];
    let rows = out["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for (row, p) in rows.iter().zip(printed) {
        let got = row["F_25^-1(alpha)"].as_f64().unwrap();
        assert!((got - p).abs() <= 1e-3, "{got} vs {p}");
    }
    assert_eq!(out["params"]["K"], 25);
    assert_eq!(out["metadata"]["diagnostics"]["t_max"], 6);
    assert_eq!(out["metadata"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn table2_layout() {
    let csv = stdout(&["dist", "table2"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,Mean,Variance,Skewness,Kurtosis");
    let ms: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ms, ["5", "25", "45", "65", "85", "105", "125", "145"]);
}

#[test]
fn fig1_increases() {
    let out = json(&["dist", "fig1", "--m-grid", "5:85:20", "--format", "json"]);
    let values: Vec<f64> = out["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["Pr(0.7<l_n/l_1<1)"].as_f64().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
}

#[test]
fn point_evaluations() {
    let out = json(&["dist", "cdf", "--m", "10", "--n", "3", "--beta", "1", "--x", "0,0.389", "--format", "json"]);
    assert_eq!(out["rows"][0]["cdf"].as_f64().unwrap(), 0.0);
    assert!((out["rows"][1]["cdf"].as_f64().unwrap() - 0.01).abs() <= 1e-3);
    let out = json(&["dist", "moment", "--m", "5", "--n", "2", "--beta", "1", "--K", "60", "--h", "0,1", "--format", "json"]);
    assert!((out["rows"][0]["moment"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!((out["rows"][1]["moment"].as_f64().unwrap() - 0.667).abs() <= 1e-3);
    let general = stdout(&["dist", "pdf", "--m", "10", "--n", "3", "--beta", "1", "--general", "--x", "0.5", "--digits", "12"]);
    let singular = stdout(&["dist", "pdf", "--m", "10", "--n", "3", "--beta", "1", "--x", "0.5", "--digits", "12"]);
    assert_eq!(general, singular);
    let csv = stdout(&["dist", "quantile", "--m", "10", "--n", "3", "--beta", "2", "--alpha", "0.01", "--digits", "3"]);
    assert_eq!(csv, "alpha,quantile\n0.01,0.451\n");
}

#[test]
fn sim_is_reproducible() {
    let args = ["sim", "--m", "10", "--n", "3", "--beta", "1", "--reps", "2000", "--seed", "9", "--alpha", "0.5"];
    assert_eq!(stdout(&args), stdout(&args));
    let moments = json(&["sim", "--m", "5", "--n", "2", "--beta", "2", "--reps", "2000", "--moments", "--format", "json"]);
    assert!(moments["rows"][0]["Kurtosis"].as_f64().unwrap() > 1.0);
    let dir = scratch("dump");
    let dump = dir.join("samples.txt");
    stdout(&["sim", "--m", "6", "--n", "2", "--beta", "1", "--reps", "10", "--dump", dump.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 10);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["dist", "cdf", "--m", "10", "--n", "3", "--beta", "3", "--x", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["jack", "expand", "--partition", "2,x", "--beta", "1", "--m", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sim", "--m", "10", "--n", "3", "--beta", "4"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["dist", "cdf", "--m", "10", "--n", "3", "--beta", "1", "--x", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["dist", "cdf", "--m", "3", "--n", "3", "--beta", "1", "--x", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["jack", "expand", "--partition", "1,1,1", "--beta", "1", "--m", "2"]).status.code(), Some(1));
    let out = run(&["dist", "quantile", "--m", "10", "--n", "3", "--beta", "1", "--K", "3", "--alpha", "0.99"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("increase K"));
}

#[test]
fn output_file_and_cache() {
    let dir = scratch("cache");
    let target = dir.join("out.json");
    let args = ["jack", "expand", "--partition", "3,2", "--beta", "2", "--m", "3", "--format", "json"];
    let first = Command::new(env!("CARGO_BIN_EXE_jackratio"))
        .args(args)
        .args(["--output", target.to_str().unwrap()])
        .env("JACKRATIO_CACHE_DIR", &dir)
        .output()
        .unwrap();
    assert!(first.status.success());
    assert!(first.stdout.is_empty());
    let cache = jackratio::snapshot::cache_file(&dir);
    assert!(cache.exists());
    let second = Command::new(env!("CARGO_BIN_EXE_jackratio"))
        .args(args)
        .env("JACKRATIO_CACHE_DIR", &dir)
        .output()
        .unwrap();
    assert!(second.status.success());
    assert!(second.stderr.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), second.stdout);

    std::fs::write(&cache, b"garbage").unwrap();
    let third = Command::new(env!("CARGO_BIN_EXE_jackratio"))
        .args(args)
        .env("JACKRATIO_CACHE_DIR", &dir)
        .output()
        .unwrap();
    assert!(third.status.success());
    assert!(String::from_utf8_lossy(&third.stderr).contains("ignoring Jack table cache"));
    assert_eq!(third.stdout, second.stdout);
    std::fs::remove_dir_all(dir).unwrap();
}
