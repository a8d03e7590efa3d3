use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsk")).args(args).output().expect("hsk runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("hsk_cli_{name}_{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn curve_genus_three() {
    let out = hsk(&["curve", "--k", "2", "--tau", "0+2i", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "hsk/1");
    assert_eq!(r["command"], "curve");
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"]["genus"], 3);
    assert_eq!(r["result"]["branch_counts"], serde_json::json!([4, 8]));
}

#[test]
fn chern_rank_five() {
    let out = hsk(&["chern", "--k", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["ch_V"], "5 - 2·t̂");
    assert_eq!(r["result"]["ch_E_check"], "2 - 5·t·p");
    assert_eq!(r["result"]["deg_I"], "0");
    assert_eq!(r["result"]["index_c1"], "-5");
    assert!(r["invariants"].as_array().unwrap().iter().all(|i| i["passed"] == true));
}

#[test]
fn output_is_deterministic() {
    let args = ["ratmap", "--k", "2", "--tau", "0.1+1.3i", "--xi0", "0.2+0.35i", "--seed", "9"];
    let a = hsk(&args);
    let b = hsk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("time"));
}

#[test]
fn config_file_and_flag_override() {
    let d = scratch("cfg");
    let p = d.join("run.json");
    std::fs::write(&p, r#"{"k": 3, "tau": [0.0, 2.0], "xi0": "0.3+0.4i", "seed": 4}"#).unwrap();
    let r = report(&hsk(&["curve", "--config", p.to_str().unwrap(), "--k", "1"]));
    assert_eq!(r["config"]["k"], 1);
    assert_eq!(r["config"]["seed"], 4);
    assert_eq!(r["config"]["tau"], serde_json::json!([0.0, 2.0]));
    assert_eq!(r["result"]["genus"], 1);
}

#[test]
fn bad_config_exits_two() {
    let d = scratch("bad");
    let p = d.join("bad.json");
    std::fs::write(&p, r#"{"k": 2, "unknown": 1}"#).unwrap();
    assert_eq!(hsk(&["curve", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&p, "not json").unwrap();
    assert_eq!(hsk(&["curve", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(hsk(&["curve", "--tau", "1+0i"]).status.code(), Some(2));
    assert_eq!(hsk(&["hitchin", "--metric", "hyperbolic"]).status.code(), Some(2));
    assert_eq!(hsk(&["curve", "--xi0", "zz"]).status.code(), Some(2));
    assert_eq!(hsk(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_one_with_diagnostics() {
    let out = hsk(&["curve", "--xi0", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    assert_eq!(r["error"]["kind"], "Validation");
}

#[test]
fn outputs_written() {
    let d = scratch("out");
    let dir = d.to_str().unwrap();
    assert_eq!(hsk(&["ratmap", "--k", "1", "--out", dir]).status.code(), Some(0));
    for f in ["report.json", "ratmap.json", "ratmap_samples.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("ratmap.json")).unwrap()).unwrap();
    assert_eq!(m["k"], 1);
    let csv = std::fs::read_to_string(d.join("ratmap_samples.csv")).unwrap();
    assert!(csv.starts_with("w_re,w_im,r_re,r_im\n"));
    assert!(csv.lines().count() > 60);
}

#[test]
fn flatmodel_report() {
    let out = hsk(&["flatmodel", "--xi", "0.3,0.2", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let g = r["result"]["green_norm"].as_f64().unwrap();
    assert!(g <= r["result"]["green_bound"].as_f64().unwrap());
    assert!((r["result"]["k0_l1"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn hitchin_abelian_and_biquard() {
    for k in ["1", "2"] {
        let out = hsk(&["hitchin", "--k", k]);
        assert_eq!(out.status.code(), Some(0), "k = {k}");
        let r = report(&out);
        assert!(r["result"]["r2"].as_f64().unwrap() < 1e-9 * r["result"]["scale"].as_f64().unwrap());
    }
    assert_eq!(hsk(&["hitchin", "--k", "3"]).status.code(), Some(1));
}

#[test]
fn hitchin_dump_round_trips() {
    let d = scratch("dump");
    let out = hsk(&["hitchin", "--k", "1", "--grid", "64", "--metric", "poincare", "--out", d.to_str().unwrap()]);
    assert!(out.status.code().is_some());
    let header: Value = serde_json::from_str(&std::fs::read_to_string(d.join("configuration.json")).unwrap()).unwrap();
    assert_eq!(header["metric"], "poincare");
    assert!(d.join("configuration.bin").metadata().unwrap().len() > 0);
}

#[test]
fn documented_examples() {
    let r = report(&hsk(&["curve", "--k", "2", "--tau", "0+2i", "--xi0", "0.3+0.4i", "--seed", "7"]));
    assert_eq!(r["result"]["genus"], 3);
    assert_eq!(r["result"]["branch_counts"], serde_json::json!([4, 8]));

    let out = hsk(&["flatmodel", "--xi", "3.14159,3.14159"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let pi = std::f64::consts::PI;
    assert!((r["result"]["k0_l1"].as_f64().unwrap() - 2.0 * pi).abs() < 1e-6);
    let rate = r["result"]["decay_rate"].as_f64().unwrap();
    assert!((rate / (2f64.sqrt() * pi) - 1.0).abs() < 0.05, "decay rate {rate}");
}

#[test]
fn selftest_passes_all_criteria() {
    let out = hsk(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let inv = r["invariants"].as_array().unwrap();
    assert_eq!(inv.len(), 12);
    assert!(inv.iter().all(|i| i["passed"] == true));
    let lines = String::from_utf8_lossy(&out.stderr);
    assert_eq!(lines.lines().filter(|l| l.contains("PASS")).count(), 12);
}
