use std::process::{Command, Output};

use serde_json::Value;

fn burger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burger"))
        .args(args)
        .env_remove("BURGER_SEED")
        .output()
        .expect("spawn burger")
}

fn json(args: &[&str]) -> Value {
    let out = burger(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn enumerate_mullin_two_edges() {
    let v = json(&["enumerate", "--n", "2", "--check", "mullin"]);
    assert_eq!(v["count"], 10);
    assert_eq!(v["pass"], true);
    assert_eq!(v["meta"]["config"]["enumerate"]["n"], 2);
}

#[test]
fn chi_is_byte_identical_across_runs_and_threads() {
    let args = ["chi", "--y", "0", "--z", "1", "--samples", "1000", "--seed", "7"];
    let a = burger(&args);
    let b = burger(&args);
    let mut threaded = vec!["--threads", "2"];
    threaded.extend(args);
    let c = burger(&threaded);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["chi"]["samples"], 1000);
    assert!(v["chi"]["chi"].as_f64().unwrap() > 1.5);
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_burger"))
            .args(["simulate", "--y", "0.5", "--z", "1", "--n", "200", "--grid", "5"])
            .env("BURGER_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn simulate_csv_schema() {
    let out = burger(&["simulate", "--y", "0", "--z", "2", "--n", "500", "--grid", "10", "--replicas", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "replica,t,U,V");
    assert_eq!(rows.len(), 1 + 3 * 11);
    for r in &rows[1..] {
        let f: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f.len(), 4);
    }
    assert!(text.starts_with("# burger "));
}

#[test]
fn map_roundtrip_through_text_file() {
    let dir = std::env::temp_dir().join(format!("burger-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("m.txt");
    let f = file.to_str().unwrap();
    let word = "hhHcCH";
    assert!(burger(&["map", "--word", word, "--format", "text", "--out", f]).status.success());
    let back = burger(&["map", "--file", f, "--format", "word"]);
    let text = String::from_utf8(back.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), [word]);
    let v = json(&["map", "--word", word]);
    assert_eq!(v["edges"], 3);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn tutte_and_partition_agree_on_tree_count() {
    let t = json(&["tutte", "--word", "hcHC"]);
    let z = json(&["partition", "--word", "hcHC", "--y", "1", "--z", "1"]);
    assert_eq!(t["t_1_1"].as_str().unwrap().parse::<f64>().unwrap(), z["value"].as_f64().unwrap());
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        vec!["simulate", "--n", "10"],
        vec!["simulate", "--y", "1", "--z", "1", "--pf", "0.1", "--n", "10"],
        vec!["enumerate", "--n", "2", "--check", "bogus"],
        vec!["map", "--word", "hx"],
        vec!["chi", "--pf", "0.7", "--ps", "0.5"],
    ] {
        let out = burger(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
