mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

use renorm_core::cli::{self, MapKind, MapSpecDocument, Options};
use renorm_core::Config;

const DOUBLING: &str = r#"
schema = 1
kind = "fixed-point-seed"
permutation = "p=2; 0->1,1->0"
[thickening]
form = "linear-y"
eps_bar = 1e-2
"#;

const LOGISTIC: &str = r#"
kind = "logistic"
[parameters]
a = 3.57
"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn renorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().unwrap()
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = renorm(args);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), doc)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixed_point_command_reports_feigenbaum_scaling() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "logistic.toml", LOGISTIC);
    let (code, doc) = run_json(&["fixed-point", s(&spec)]);
    assert_eq!(code, 0);
    let (delta, sigma) = common::oracle::feigenbaum_oracle();
    let v = &doc["values"];
    assert!((v["sigma"].as_f64().unwrap() - sigma).abs() < 1e-4);
    assert!((v["unstable_eigenvalue"].as_f64().unwrap() - delta).abs() < 1e-3);
    assert_eq!(doc["command"], "fixed-point");
    assert_eq!(doc["inputs"]["specs"][0]["parameters"]["a"], 3.57);
    assert!(doc["assertions"].as_array().unwrap().iter().all(|a| a["passed"] == true));
}

#[test]
fn bad_inputs_exit_with_bad_input() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "logistic.toml", LOGISTIC);
    let out = renorm(&["fixed-point", s(&spec), "--perm", "p=3; 0->1,1->1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"bad-input\""));

    let unknown = write(&dir, "unknown.toml", &format!("{LOGISTIC}\nwobble = 2\n"));
    assert_eq!(renorm(&["tower", s(&unknown)]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(renorm(&["tower", s(&missing)]).status.code(), Some(2));
    let bad_perm = write(&dir, "perm.toml", "kind = \"logistic\"\npermutation = \"0->1\"\n[parameters]\na = 3.57\n");
    assert_eq!(renorm(&["tower", s(&bad_perm)]).status.code(), Some(2));
}

#[test]
fn tighter_tolerance_never_increases_the_residual() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "logistic.toml", LOGISTIC);
    let mut last = f64::INFINITY;
    for tol in ["1e-4", "1e-7", "1e-10"] {
        let (code, doc) = run_json(&["fixed-point", s(&spec), "--tol", tol]);
        assert_eq!(code, 0);
        let r = doc["values"]["residual"].as_f64().unwrap();
        assert!(r <= last && r < tol.parse().unwrap(), "{r} after {last}");
        last = r;
    }
}

#[test]
fn jacobian_of_linear_thickening() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d.toml", &DOUBLING.replace("1e-2", "3e-3"));
    let (code, doc) = run_json(&["jacobian", s(&spec), "--depth", "4"]);
    assert_eq!(code, 0);
    let b = doc["values"]["b"].as_f64().unwrap();
    assert!((b - 3e-3).abs() < 1e-10, "{b}");

    // the same ε written as a coefficient matrix
    let m = write(&dir, "m.toml", &DOUBLING.replace("form = \"linear-y\"\neps_bar = 1e-2", "form = \"coeff-matrix\"\neps_bar = 3e-3\ndata = [[0.0, 3e-3]]"));
    let (_, doc2) = run_json(&["jacobian", s(&m), "--depth", "4"]);
    assert!((doc2["values"]["b"].as_f64().unwrap() - b).abs() < 1e-14);
}

#[test]
fn universality_column_decreases() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d.toml", DOUBLING);
    let (code, doc) = run_json(&["universality", s(&spec)]);
    assert_eq!(code, 0);
    let t = doc["tables"].as_array().unwrap().iter().find(|t| t["name"] == "universality").unwrap();
    let i = t["columns"].as_array().unwrap().iter().position(|c| c == "e_n").unwrap();
    let e: Vec<f64> = t["rows"].as_array().unwrap().iter().map(|r| r[i].as_f64().unwrap()).collect();
    assert!(e.len() >= 5 && e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
}

#[test]
fn rigidity_of_identical_maps() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d.toml", DOUBLING);
    let (code, doc) = run_json(&["rigidity", s(&spec), s(&spec), "--depth", "4"]);
    assert_eq!(code, 0);
    assert_eq!(doc["values"]["alpha_bound"].as_f64(), Some(1.0));
    assert_eq!(renorm(&["rigidity", s(&spec)]).status.code(), Some(2));
}

#[test]
fn csv_output_and_determinism() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d.toml", DOUBLING);
    let out = dir.path().join("run");
    let o = renorm(&["cantor", s(&spec), "--depth", "3", "--format", "csv", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pieces = std::fs::read_to_string(out.join("pieces.csv")).unwrap();
    assert!(pieces.starts_with("word,center_x,center_y,x_lo,x_hi,y_lo,y_hi,diameter\n"));
    assert_eq!(pieces.lines().count(), 9);
    let conj = std::fs::read_to_string(out.join("conjugacy.csv")).unwrap();
    assert!(conj.starts_with("word,residual,diameter,image_contained"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();

    // a second run with one worker gives the same tables bit for bit
    let o2 = Command::new(env!("CARGO_BIN_EXE_renorm"))
        .args(["cantor", s(&spec), "--depth", "3"])
        .env("RENORM_WORKERS", "1")
        .output()
        .unwrap();
    let doc2: Value = serde_json::from_slice(&o2.stdout).unwrap();
    assert_eq!(doc["tables"], doc2["tables"]);
}

#[test]
fn linefield_reports_failed_growth_assertion() {
    // the projective gap shrinks with the base distance, so the growth
    // assertion fails and the exit status says so
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d.toml", DOUBLING);
    let o = renorm(&["linefield", s(&spec), "--depth", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], false);
    assert_eq!(doc["assertions"][0]["name"], "gap_growth");
}

#[test]
fn spec_validation() {
    let cases = [
        "kind = \"logistic\"\n",
        "kind = \"polynomial\"\n[parameters]\na = 3.5\n",
        "kind = \"logistic\"\nschema = 2\n[parameters]\na = 3.5\n",
        "kind = \"fixed-point-seed\"\n[thickening]\nform = \"linear-y\"\neps_bar = 1e-3\ndata = [1.0]\n",
        "kind = \"fixed-point-seed\"\n[thickening]\nform = \"separable\"\neps_bar = 1e-3\n",
        "kind = \"fixed-point-seed\"\n[thickening]\nform = \"coeff-matrix\"\neps_bar = 1e-3\ndata = [1.0]\n",
        "kind = \"fixed-point-seed\"\n[thickening]\nform = \"linear-y\"\neps_bar = -1.0\n",
        "kind = \"spline\"\n",
    ];
    for c in cases {
        let e = MapSpecDocument::from_toml(c).unwrap_err();
        assert_eq!(e.kind(), "bad-input", "{c}");
    }
    let d = MapSpecDocument::from_toml(DOUBLING).unwrap();
    assert_eq!(d.kind, MapKind::FixedPointSeed);

    // a polynomial written out by hand is the logistic map
    let cfg = Config::default();
    let poly = MapSpecDocument::from_toml("kind = \"polynomial\"\n[parameters]\ncoeffs = [0.0, 3.6, -3.6]\n").unwrap();
    let v = poly.permutation().unwrap();
    let f = poly.unimodal(&v, &cfg).unwrap();
    let g = renorm_core::unimodal::UnimodalMap::logistic(3.6).unwrap();
    assert!(f.distance(&g) < 1e-13);
    // ε exceeding its declared bound
    let over = MapSpecDocument::from_toml(
        "kind = \"fixed-point-seed\"\n[thickening]\nform = \"separable\"\neps_bar = 1e-3\ndata = [2.0]\n",
    )
    .unwrap();
    assert_eq!(over.thickening(&cfg).unwrap_err().kind(), "invalid-thickening");
}

#[test]
fn library_entry_point_checks_arity() {
    let d = MapSpecDocument::from_toml(DOUBLING).unwrap();
    let e = cli::run(cli::Command::Rigidity, &[d], &Options::default(), &Config::default()).unwrap_err();
    assert_eq!(e.kind(), "bad-input");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_documents_round_trip(a in 3.0f64..4.0, eps in 0.0f64..0.1, g0 in 0.0f64..0.5, g1 in 0.0f64..0.5, rev in any::<bool>()) {
        let text = format!(
            "kind = \"logistic\"\norientation = \"{}\"\npermutation = \"p=2; 0->1,1->0\"\n[parameters]\na = {a:?}\n[thickening]\nform = \"separable\"\neps_bar = {eps:?}\ndata = [{g0:?}, {g1:?}]\n",
            if rev { "reversing" } else { "preserving" },
        );
        let d = MapSpecDocument::from_toml(&text).unwrap();
        let back = MapSpecDocument::from_toml(&d.to_toml()).unwrap();
        prop_assert_eq!(&d, &back);
        prop_assert_eq!(d.parameters.a, Some(a));
    }
}
