use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dcext(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcext"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn strip_csv_has_the_lower_bounds() {
    let dir = TempDir::new().unwrap();
    let o = dcext(dir.path(), &["counterexample", "strip", "--tau-list", "1,10,100", "--csv-out", "strip.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("strip.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["tau", "lb"]);
    let rows: Vec<(f64, f64)> = rd.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for ((tau, lb), want_tau) in rows.iter().zip([1.0, 10.0, 100.0]) {
        assert_eq!(*tau, want_tau);
        // target (0, 3): λ = 1/4, far point (4τ/3, -1) where f = 8τ²/9, so LB = 4τ² - 3·8τ²/9
        let want = 4.0 * tau * tau - 3.0 * 8.0 * tau * tau / 9.0;
        assert!((lb - want).abs() <= 1e-12 * want.max(1.0), "{lb} vs {want}");
    }
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["verdict"], "pass");
    assert_eq!(out["artifacts"][0], "strip.csv");
}

#[test]
fn elltwo_with_two_coordinates() {
    let dir = TempDir::new().unwrap();
    let o = dcext(dir.path(), &["counterexample", "elltwo", "--N", "2", "--report-out", "r.json"]);
    // no cluster can reach the blow-up threshold with two coordinates
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["verdict"], "fail");
    let rows = r["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0]["n"].as_u64(), rows[0]["k"].as_u64()), (Some(1), Some(2)));
    // h_1 = 1, h_2 = √3/2: ||z_{1,2}||² = 1 - 3/4
    assert!((rows[0]["norm"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert!((rows[0]["g_value"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
}

#[test]
fn elltwo_default_truncation_passes() {
    let dir = TempDir::new().unwrap();
    let o = dcext(dir.path(), &["counterexample", "elltwo", "--csv-out", "e.csv", "--report-out", "e.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert!(text.starts_with("n,k,norm,g_value,cluster_diam\n"));
    assert_eq!(text.lines().count() - 1, 63 * 64 / 2);
    assert_eq!(report(&dir.path().join("e.json"))["config"]["N"], 64);
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), "{}").unwrap();
    let o = dcext(dir.path(), &["--config", "c.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("verb"), "{}", stderr(&o));

    fs::write(dir.path().join("blank.json"), "").unwrap();
    let o = dcext(dir.path(), &["--config", "blank.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config"), "{}", stderr(&o));

    assert_eq!(code(&dcext(dir.path(), &[])), 2);
}

#[test]
fn invalid_fields_are_named() {
    let dir = TempDir::new().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (&["counterexample", "strip", "--samples", "0"], "samples"),
        (&["counterexample", "strip", "--tau-list", "10,1"], "tau_list"),
        (&["counterexample", "strip", "--tol=0"], "cert_tol"),
        (&["counterexample", "strip", "--csv-out", "missing/dir/x.csv"], "csv_out"),
        (&["subspace", "majorant"], "subspace"),
    ];
    for (args, field) in cases {
        let o = dcext(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(stderr(&o).starts_with(&format!("error: {field}")), "{args:?}: {}", stderr(&o));
    }
    fs::write(dir.path().join("c.json"), r#"{"verb": "verify", "verify": {"domain": {"kind": "ball"}, "function": {"node": "constant", "value": 0.0}}}"#).unwrap();
    let o = dcext(dir.path(), &["--config", "c.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("verify.domain"), "{}", stderr(&o));
    fs::write(dir.path().join("u.json"), r#"{"verb": "verify", "sede": 3}"#).unwrap();
    assert_eq!(code(&dcext(dir.path(), &["--config", "u.json"])), 2);
}

#[test]
fn flags_override_the_config() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"verb": "counterexample strip", "seed": 9, "tau_list": [2, 3], "samples": 17}"#).unwrap();
    let o = dcext(dir.path(), &["--config", "c.json", "--seed", "4", "--tau-list", "1,5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 4);
    assert_eq!(r["config"]["samples"], 17);
    assert_eq!(r["config"]["tau_list"], serde_json::json!([1.0, 5.0]));
    assert_eq!(r["results"]["bounds"].as_array().unwrap().len(), 2);
}

#[test]
fn identical_configs_give_identical_outputs() {
    let cfg = configs().join("subspace_construct_d.json");
    let cfg = cfg.to_str().unwrap();
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let o = dcext(dir.path(), &["--config", cfg, "--report-out", "r.json", "--csv-out", "d.csv"]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            (fs::read(dir.path().join("r.json")).unwrap(), fs::read(dir.path().join("d.csv")).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn failures_leave_no_outputs() {
    let dir = TempDir::new().unwrap();
    // |x|² has slope 2 at the unit sphere, above L = 1
    fs::write(
        dir.path().join("c.json"),
        r#"{"verb": "extend", "extend": {"method": "lipschitz", "lipschitz": 1.0,
            "function": {"node": "norm_of_affine", "offset": [0.0, 0.0], "power": 2},
            "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0}}}"#,
    )
    .unwrap();
    let o = dcext(dir.path(), &["--config", "c.json", "--csv-out", "x.csv", "--report-out", "r.json"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(!dir.path().join("x.csv").exists());
    assert!(!dir.path().join("r.json").exists());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("c.json")]);
}

#[test]
fn bundled_configs_pass() {
    let mut n = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let dir = TempDir::new().unwrap();
        let o = dcext(dir.path(), &["--config", path.to_str().unwrap(), "--report-out", "r.json"]);
        assert_eq!(code(&o), 0, "{}: {}", path.display(), stderr(&o));
        let r = report(&dir.path().join("r.json"));
        assert_eq!(r["verdict"], "pass");
        assert!(!r["certificates"].as_array().unwrap().is_empty(), "{}", path.display());
        n += 1;
    }
    assert!(n >= 7);
}

#[test]
fn lipschitz_extension_values() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("extend_lipschitz.json");
    let o = dcext(dir.path(), &["--config", cfg.to_str().unwrap(), "--csv-out", "p.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("p.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["x1", "x2", "value"]);
    for row in rd.deserialize::<(f64, f64, f64)>() {
        let (a, b, v) = row.unwrap();
        let r = a.hypot(b);
        // |x|² on the unit ball with L = 2 continues as 2|x| - 1
        let want = if r <= 1.0 { r * r } else { 2.0 * r - 1.0 };
        assert!((v - want).abs() <= 1e-6, "{a},{b}: {v} vs {want}");
    }
}
