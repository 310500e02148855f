use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qka(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qka")).args(args).env_remove("QKA_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn construct(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["construct"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    json(&qka(&all));
    path
}

fn cosines(v: &Value) -> Vec<f64> {
    v["triple"]["cosines"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

/// A file holding an orthonormalized span of `k` pseudo-random vectors of ℍⁿ.
fn random_span_file(dir: &Path, n: usize, k: usize) -> String {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let mut v: Vec<f64> = (0..4 * n).map(|_| next()).collect();
        for _ in 0..2 {
            for r in &rows {
                let d: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    let path = dir.join("random.json");
    let body = serde_json::json!({ "format_version": 1, "n": n, "k": k, "basis": rows });
    std::fs::write(&path, body.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn v4_minus_has_declared_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out = qka(&["construct", "--family", "v4", "--cos", "0.3", "0.3", "0.3", "--sign", "-", "--n", "4", "--out"]
        .iter()
        .copied()
        .chain([dir.path().join("v.json").to_str().unwrap()])
        .collect::<Vec<_>>());
    let v = json(&out);
    assert_eq!(v["k"], 4);
    for a in v["triple"]["angles"].as_array().unwrap() {
        assert!((a.as_f64().unwrap() - 0.3f64.acos()).abs() < 1e-8);
    }
    let path = dir.path().join("v.json");
    let a = json(&qka(&["angles", path.to_str().unwrap()]));
    assert_eq!(a["constant"], true);
    for c in cosines(&a) {
        assert!((c - 0.3).abs() < 1e-8);
    }
}

#[test]
fn every_construction_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--family", "totally_real", "--k", "5", "--n", "5"],
        vec!["--family", "totally_complex", "--l", "2", "--n", "3"],
        vec!["--family", "quaternionic", "--k", "8", "--n", "3"],
        vec!["--family", "im_h_line", "--n", "2"],
        vec!["--family", "cka_plane_sum", "--angles", "0.7", "--l", "2", "--n", "4"],
        vec!["--family", "complexified_cka", "--angles", "0.9", "--l", "1", "--n", "2"],
        vec!["--family", "v3", "--angles", "1.0471975511965976", "--sign", "-", "--n", "2"],
        vec!["--family", "v3", "--angles", "1.2", "--sign", "+", "--n", "3", "--seed", "9"],
        vec!["--family", "v4", "--cos", "0.6", "0.5", "0.3", "--sign", "+", "--n", "4", "--seed", "4"],
        vec!["--family", "sum_type", "--cos", "0.3", "0.3", "0.3", "--lplus", "1", "--lminus", "1", "--n", "8"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let path = construct(dir.path(), &format!("c{i}.json"), args);
        let a = json(&qka(&["angles", &path, "--samples", "300"]));
        assert_eq!(a["constant"], true, "{args:?}");
    }
}

#[test]
fn inadmissible_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    let out = qka(&["construct", "--family", "v4", "--cos", "0.9", "0.9", "0.1", "--sign", "-", "--n", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds 1"));
    assert!(!path.exists());
    let out = qka(&["construct", "--family", "nonsense", "--n", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = qka(&["construct", "--family", "sum_type", "--cos", "0.3333333333333333", "0.3333333333333333", "0.3333333333333333", "--lplus", "1", "--lminus", "1", "--n", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(qka(&["angles", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, r#"{"format_version":1,"n":1,"k":2,"basis":[[1,0,0,0],[1,0,0,0]]}"#).unwrap();
    assert_eq!(qka(&["classify", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qka(&["angles", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn random_span_is_not_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = random_span_file(dir.path(), 4, 3);
    let a = json(&qka(&["angles", &path]));
    assert_eq!(a["constant"], false);
    let c = json(&qka(&["classify", &path]));
    assert_eq!(c["protohomogeneous"]["value"], "no");
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let s = construct(dir.path(), "s.json", &["--family", "sum_type", "--cos", "0.3", "0.3", "0.3", "--lplus", "1", "--lminus", "1", "--n", "8"]);
    assert_eq!(json(&qka(&["classify", &s]))["protohomogeneous"]["value"], "no");
    let d3 = construct(dir.path(), "d3.json", &["--family", "v3", "--angles", "1.3", "--sign", "-", "--n", "3"]);
    let c = json(&qka(&["classify", &d3]));
    assert_eq!(c["protohomogeneous"]["value"], "yes");
    assert_eq!(c["branch"], "-");
    let p = construct(dir.path(), "p.json", &["--family", "v4", "--cos", "0.3", "0.3", "0.3", "--sign", "+", "--n", "4"]);
    assert_eq!(json(&qka(&["classify", &p]))["type"], serde_json::json!([1, 0]));
}

#[test]
fn moduli_examples() {
    let m = json(&qka(&["moduli", "--k", "5", "--n", "5"]));
    let strata = m["strata"].as_array().unwrap();
    assert_eq!(strata.len(), 1);
    assert_eq!(strata[0]["kind"], "point");
    let m = json(&qka(&["moduli", "--k", "4", "--n", "4"]));
    let strata = m["strata"].as_array().unwrap();
    assert_eq!(strata.len(), 2);
    assert_eq!(strata[0]["multiplicity"], 1);
    assert_eq!(strata[1]["multiplicity"], 2);
    assert_eq!(strata[1]["kind"], "region_with_z2");
    let m = json(&qka(&["moduli", "--k", "0", "--n", "3"]));
    assert!(m["strata"].as_array().unwrap().is_empty());
    assert_eq!(m["special_actions"], serde_json::json!(["N", "K", "SU(1,n+1)"]));
    let m = json(&qka(&["moduli", "--k", "4", "--n", "4", "--cos", "0.3", "0.3", "0.3"]));
    assert_eq!(m["strata"].as_array().unwrap().len(), 2);
    assert_eq!(qka(&["moduli", "--k", "13", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn selftest_quick_passes_and_is_deterministic() {
    let a = qka(&["selftest", "--quick", "--seed", "5"]);
    let b = qka(&["selftest", "--quick", "--seed", "5"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
}
