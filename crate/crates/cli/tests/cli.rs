use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = r#"{"dimension":2,"alpha":[["1","0"],["0","1"]],"beta":["1","0"],"family":{"tag":"generalized-m-kropina","m":"2","c":"C","r":"1","sign":"+"}}"#;

fn kropina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kropina")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config(dir: &Path, c: &str) -> String {
    let p = dir.join(format!("metric-c{c}.json"));
    std::fs::write(&p, CONFIG.replace("\"C\"", &format!("\"{c}\""))).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn zero_c_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = kropina(&["compute", "--config", &config(dir.path(), "0"), "--object", "f"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("c = 0 has to be excluded"));
}

#[test]
fn config_file_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = kropina(&["compute", "--config", &config(dir.path(), "1"), "--object", "f", "--at", "x=0,0;y=1,1", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // F = β^{-2}(α² + β²)^{3/2} = 3^{3/2}
    let f = v["results"][0]["values"][0].as_f64().unwrap();
    assert!((f - 27f64.sqrt()).abs() < 1e-14);
}

#[test]
fn verify_example1_exact_holds() {
    let o = kropina(&["verify-example", "example1-flat-anisotropic", "--builtin", "example1-flat-anisotropic", "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: holds"));
}

#[test]
fn verify_vsi_reports_its_failing_claims() {
    let o = kropina(&["verify-example", "example2-vsi", "--builtin", "example2-vsi", "--backend", "numeric", "--output", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = v["results"].as_array().unwrap();
    let berwald = results.iter().find(|r| r["claim"].as_str().unwrap().starts_with("berwald")).unwrap();
    assert_eq!(berwald["holds"], Value::Bool(true));
    assert!(results.iter().any(|r| r["holds"] == Value::Bool(false)));
}

#[test]
fn rationality_table_for_even_m() {
    let o = kropina(&["rationality-table", "--builtin", "euclidean-fixture", "--m", "2", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    let cert = |name: &str| rows.iter().find(|r| r["object"] == name).unwrap()["certificate"].as_str().unwrap().to_string();
    assert_eq!(cert("F"), "Irrational");
    assert_eq!(cert("ℓ_i"), "Irrational");
    assert_eq!(cert("I_i"), "Rational");
    assert_eq!(cert("g_ij"), "Rational");
    assert!(rows.iter().all(|r| r["matches"] == Value::Bool(true)));
}

#[test]
fn json_reports_reserialize_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = kropina(&[
        "compute",
        "--builtin",
        "euclidean-fixture",
        "--object",
        "spray",
        "--samples",
        "3",
        "--seed",
        "4",
        "--output",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(kropina_cli::json::to_string(&v), text);
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    let args = ["compute", "--builtin", "euclidean-fixture", "--object", "ric", "--samples", "2", "--seed", "9"];
    let text = stdout(&kropina(&args));
    let mut ja = args.to_vec();
    ja.extend(["--output", "json"]);
    let v: Value = serde_json::from_str(&stdout(&kropina(&ja))).unwrap();
    for r in v["results"].as_array().unwrap() {
        let x = r["values"][0].as_f64().unwrap();
        assert!(text.contains(&kropina_cli::json::float(x)), "{x} missing from text output");
    }
}

#[test]
fn sampling_without_seed_is_refused() {
    let o = kropina(&["compute", "--builtin", "euclidean-fixture", "--object", "ric", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("--seed"));
}

#[test]
fn runs_are_deterministic() {
    let args = ["classify", "--builtin", "example1-flat-anisotropic", "--property", "ricci-flat", "--bases", "2", "--seed", "5", "--output", "json"];
    let a = stdout(&kropina(&args));
    let b = stdout(&kropina(&args));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["verdict"], "holds");
}

#[test]
fn exact_backend_refuses_fractional_m() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("half.json");
    std::fs::write(&p, CONFIG.replace("\"C\"", "\"1\"").replace("\"m\":\"2\"", "\"m\":\"1/2\"")).unwrap();
    let o = kropina(&["compute", "--config", p.to_str().unwrap(), "--object", "f", "--at", "x=0,0;y=1,1", "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_builtin_is_a_config_error() {
    let o = kropina(&["compute", "--builtin", "nowhere", "--object", "f"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn both_backends_agree_on_compute() {
    let o = kropina(&["compute", "--builtin", "example1-flat-anisotropic", "--object", "ric", "--backend", "both", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
