use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dcd::io;
use serde_json::Value;

fn dcd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcd")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dcd(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and the single stderr line of a failing command.
fn fails(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = dcd(dir, args);
    assert!(!out.status.success(), "{args:?} succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    (out.status.code().unwrap(), err.trim_end().to_string())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn two_k5(dir: &Path) {
    let mut text = String::from("# two disjoint cliques\n");
    for base in [0, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                text.push_str(&format!("{} {}\n", base + i, base + j));
            }
        }
    }
    fs::write(dir.join("k5.edges"), text).unwrap();
}

#[test]
fn gen_is_reproducible_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--design", "paper-sbm", "--n", "1200", "--seed", "7", "--out", "a"]);
    ok(d, &["gen", "--design", "paper-sbm", "--n", "1200", "--seed", "7", "--out", "b"]);
    for ext in [".edges", ".communities", ".groups", ".model.json"] {
        assert_eq!(fs::read(d.join(format!("a{ext}"))).unwrap(), fs::read(d.join(format!("b{ext}"))).unwrap(), "{ext}");
    }
    let g = io::parse_edge_list(&fs::read_to_string(d.join("a.edges")).unwrap(), "a").unwrap();
    let report = json(&ok(d, &["detect", "a.edges", "--no-timings"]));
    assert_eq!(report["communities"]["labels"].as_array().unwrap().len(), 1200);
    let b = report["b_hat"]["data"].as_array().unwrap();
    let labels: Vec<usize> = report["communities"]["labels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    let k = report["community_count"].as_u64().unwrap() as usize;
    // Recover the edge count from B-hat and the community sizes.
    let mut sizes = vec![0.0; k];
    for &l in &labels {
        sizes[l] += 1.0;
    }
    let mut ordered_pairs = 0.0;
    for a in 0..k {
        for c in 0..k {
            let pairs = if a == c { sizes[a] * (sizes[a] - 1.0) } else { sizes[a] * sizes[c] };
            ordered_pairs += b[a * k + c].as_f64().unwrap() * pairs;
        }
    }
    assert_eq!((ordered_pairs / 2.0).round() as usize, g.edge_count());
}

#[test]
fn degree_corrected_gen_writes_theta() {
    let dir = tempfile::tempdir().unwrap();
    let summary = json(&ok(dir.path(), &["gen", "--design", "paper-dcsbm", "--n", "300", "--seed", "1", "--out", "d"]));
    assert_eq!(summary["files"].as_array().unwrap().len(), 5);
    let theta = io::parse_reals(&fs::read_to_string(dir.path().join("d.theta")).unwrap(), "d").unwrap();
    assert_eq!(theta.len(), 300);
    assert!(theta.iter().all(|&t| t == 0.8 || t == 1.2));
    assert!(theta.contains(&0.8) && theta.contains(&1.2));
}

#[test]
fn gen_from_spec_and_invalid_specs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("m.json"), r#"{"kind": "sbm", "b": [[0.9, 0.1], [0.1, 0.9]], "pi": [0.5, 0.5], "group_of": [1, 2]}"#).unwrap();
    let s = json(&ok(d, &["gen", "--spec", "m.json", "--n", "50", "--out", "s"]));
    assert_eq!(s["nodes"], 50);
    assert_eq!(s["groups"], 2);
    let (code, err) = fails(d, &["gen", "--design", "paper-sbm", "--group-sizes", "3,0", "--out", "x"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[usage]: ") && err.contains("group sizes"), "{err}");
    fs::write(d.join("bad.json"), r#"{"kind": "sbm", "b": [[0.9, 0.1], [0.2, 0.9]], "pi": [0.5, 0.5], "group_of": [1, 2]}"#).unwrap();
    assert_eq!(fails(d, &["gen", "--spec", "bad.json", "--n", "5", "--out", "x"]).0, 2);
    assert_eq!(fails(d, &["gen", "--design", "nope", "--out", "x"]).0, 2);
}

#[test]
fn detect_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    two_k5(d);
    let r = json(&ok(d, &["detect", "k5.edges"]));
    assert_eq!(r["group_count"], 2);
    assert_eq!(r["community_count"], 2);
    assert!(r["timings"]["total_ms"].as_f64().unwrap() >= 0.0);
    let r = json(&ok(d, &["detect", "k5.edges", "--mode", "threshold", "--delta", "1.5", "--no-timings"]));
    assert_eq!(r["group_count"], 1);
    assert!(r.get("timings").is_none());
}

#[test]
fn one_group_equals_plain_detector() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--design", "paper-sbm", "--n", "300", "--seed", "3", "--out", "g"]);
    let r = json(&ok(d, &["detect", "g.edges", "--groups", "1", "--seed", "5", "--no-timings"]));
    assert_eq!(r["group_count"], 1);
    let g = io::parse_edge_list(&fs::read_to_string(d.join("g.edges")).unwrap(), "g").unwrap();
    let cfg = dcd_core::pipeline::PipelineConfig { seed: 5, ..dcd_core::pipeline::PipelineConfig::new(dcd_core::pipeline::ModelKind::Sbm) };
    let plain = dcd_core::pipeline::run_method(
        &g,
        dcd_core::pipeline::Method::Plain(dcd_core::detection::Detector::Ssp),
        &cfg,
        &dcd_core::pipeline::Sequential,
        &dcd_core::pipeline::NoClock,
    )
    .unwrap();
    let labels: Vec<u32> = r["communities"]["labels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as u32).collect();
    assert_eq!(labels, plain.communities.as_slice());
}

#[test]
fn eval_metrics_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--design", "paper-sbm", "--n", "600", "--seed", "2", "--out", "g"]);
    ok(d, &["detect", "g.edges", "--out", "r.json"]);
    let m = json(&ok(d, &["eval", "--report", "r.json", "--communities", "g.communities", "--true-groups", "g.groups"]));
    let nmi = m["nmi"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&nmi));
    assert!(m["g_nmi"].as_f64().unwrap() > 0.9);
    let m = json(&ok(d, &["eval", "--graph", "g.edges", "--mask", "0.1"]));
    assert!(m["auc"].as_f64().unwrap() >= 0.9, "{m}");
    assert_eq!(m["masked_pairs"], 17970);

    let (code, err) = fails(d, &["eval", "--report", "r.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("--communities") && err.contains("--true-groups") && err.contains("--mask"), "{err}");
    fs::write(d.join("short.labels"), "1\n2\n").unwrap();
    let (code, err) = fails(d, &["eval", "--report", "r.json", "--communities", "short.labels"]);
    assert_eq!(code, 3);
    assert!(err.starts_with("error[input]: "), "{err}");
    assert_eq!(fails(d, &["eval", "--graph", "g.edges", "--mask", "1.0"]).0, 2);
}

#[test]
fn input_errors_have_line_numbers_and_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.edges"), "0 1\n# fine\n1 two\n").unwrap();
    assert_eq!(fails(d, &["detect", "bad.edges"]), (3, "error[parse]: bad.edges:3: bad node id `two`".to_string()));
    assert_eq!(fails(d, &["detect", "missing.edges"]).0, 3);
    fs::write(d.join("empty.edges"), "# nodes: 4\n").unwrap();
    let (code, err) = fails(d, &["detect", "empty.edges"]);
    assert_eq!(code, 4);
    assert!(err.starts_with("error[numeric]: "), "{err}");
    let (code, err) = fails(d, &["detect", "bad.edges", "--frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[usage]: "), "{err}");
    assert_eq!(fails(d, &["detect", "bad.edges", "--jobs", "0"]).0, 2);
    assert_eq!(fails(d, &[]).0, 2);
    assert!(ok(d, &["--help"]).contains("bench"));
}

#[test]
fn bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["bench", "--design", "paper-sbm", "--n", "200,300", "--reps", "1", "--seed", "4", "--no-timings", "--series", "s.csv"];
    let a = ok(d, &args);
    let series_a = fs::read(d.join("s.csv")).unwrap();
    assert_eq!(a, ok(d, &args));
    assert_eq!(series_a, fs::read(d.join("s.csv")).unwrap());
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "n,G,K,method,nmi_mean,nmi_sd,time_mean_ms,g_nmi,failed");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("200,4,12,D-SSP,"));
    assert!(rows[2].starts_with("200,4,12,FG,"));
    let timed = ok(d, &["bench", "--design", "paper-sbm", "--n", "200", "--methods", "fg"]);
    let cells: Vec<&str> = timed.lines().nth(1).unwrap().split(',').collect();
    assert!(cells[6].parse::<f64>().unwrap() >= 0.0);
    assert_eq!(cells[7], "");
    assert_eq!(fails(d, &["bench", "--design", "paper-sbm", "--methods", "magic"]).0, 2);
}
