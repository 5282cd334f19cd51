use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use slfib::elliptic_engine::dump::read_dump;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("slfib-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn slfib(dir: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slfib"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env("SLFIB_CACHE_DIR", dir.join("cache"))
        .output()
        .unwrap()
}

fn json_line(o: &Output) -> Value {
    let s = String::from_utf8_lossy(&o.stdout);
    serde_json::from_str(s.lines().next().expect("no output")).unwrap()
}

#[test]
fn solve_writes_dump_and_diagnostics() {
    let d = scratch("solve");
    let o = slfib(&d, &["solve", "--kind", "disc", "--a", "1.0", "--cos", "1=1", "--cos", "3=-1", "--n", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = json_line(&o);
    assert_eq!(diag["converged"], Value::Bool(true));
    assert!(diag["residual_norm"].as_f64().unwrap() < 1e-8);
    let f = read_dump(std::io::BufReader::new(std::fs::File::open(d.join("field.dump")).unwrap())).unwrap();
    assert_eq!(f.domain.n_x, 128);
    assert!(f.v.iter().all(|v| v.is_finite()));
    let on_file: Value = serde_json::from_str(&std::fs::read_to_string(d.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(on_file["a"], diag["a"]);
}

#[test]
fn classify_oracle_field() {
    let d = scratch("classify-oracle");
    let o = slfib(&d, &["classify", "--oracle", "--a", "0", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json_line(&o);
    let recs = rep["records"].as_array().unwrap();
    assert_eq!(recs.len(), 1);
    assert!(recs[0]["x_location"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(recs[0]["type"], "increasing");
    assert_eq!(recs[0]["multiplicity"], 1);
    assert!(d.join("singularities.json").exists());
}

#[test]
fn classify_solved_limit_field() {
    let d = scratch("classify-solve");
    let o = slfib(&d, &["classify", "--a", "0", "--alpha", "1", "--n", "48"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json_line(&o);
    let recs = rep["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    let types: Vec<&str> = recs.iter().map(|r| r["type"].as_str().unwrap()).collect();
    assert!(types.contains(&"increasing") && types.contains(&"decreasing"), "{types:?}");
    assert_eq!(rep["bound_ok"], Value::Bool(true));
}

#[test]
fn sweep_strip_family_writes_ndjson_and_csv() {
    let d = scratch("sweep");
    let o = slfib(&d, &["sweep", "--family", "strip", "--t", "0,0.5", "--nx", "32", "--ny", "17"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t,alpha_t,beta_t");
    assert_eq!(rows.len(), 3);
    let nd = std::fs::read_to_string(d.join("sweep.ndjson")).unwrap();
    for l in nd.lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        let (a, b) = (v["roots"]["alpha"].as_f64().unwrap(), v["roots"]["beta"].as_f64().unwrap());
        assert!(a <= b + 1e-6);
    }
}

#[test]
fn monodromy_outputs() {
    let d = scratch("monodromy");
    let o = slfib(&d, &["monodromy", "--show-fixed", "--duality"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.join("ribbon_positive.csv")).unwrap();
    assert!(csv.starts_with("piece_id,x1,x2,x3"));
    assert!(d.join("ribbon_negative.csv").exists() && d.join("monodromy.json").exists());
}

#[test]
fn fiber_sample_then_sl_check() {
    let d = scratch("fiber");
    let o = slfib(&d, &["fiber-sample", "--source", "oracle", "--a", "0.5", "--samples", "20", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.join("fiber.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let o = slfib(&d, &["sl-check", "--source", "oracle-prime", "--a", "0.5", "--frames", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_point_and_bad_usage() {
    let d = scratch("oracle");
    let o = slfib(&d, &["oracle", "--a", "1", "--x", "0.5", "--y", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert!((v["v"].as_f64().unwrap() - 0.5 * (0.25f64 + 2.0).sqrt()).abs() < 1e-12);
    let o = slfib(&d, &["solve", "--n", "not-a-number"]);
    assert_eq!(o.status.code(), Some(2));
    let o = slfib(&d, &["solve", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn project_roundtrip_through_cli() {
    let d = scratch("project");
    let o = slfib(&d, &["project", "--family", "disc", "--z1", "1,0", "--z2", "0.5,0", "--z3", "0.1,0.2", "--n", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_line(&o);
    assert!((v["a"].as_f64().unwrap() - 0.375).abs() < 1e-12);
    assert!(v["b"].as_f64().unwrap().is_finite());
}
