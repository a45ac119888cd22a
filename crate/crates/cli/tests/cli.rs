use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use osgt::gtforms::BilinearForm;
use osgt::linalg::{c, identity, matrix_unit};
use osgt::ohmaps::OHMap;
use osgt::opspace::TensorRep;
use osgt::random::{gaussian_matrix, rng};
use osgt::ComplexMatrix;
use serde_json::{json, Value};

fn osgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osgt")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schur_dom_identity_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("i3.csv");
    std::fs::write(&p, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let out = osgt(&["schur-dom", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["results"]["c"].as_f64().unwrap() - 3.0).abs() < 1e-8);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["command"], "schur-dom");
    assert!(r["config"]["tolerances"].as_object().unwrap().values().all(|t| t.as_f64().unwrap() > 0.0));
    assert_eq!(r["constants"].as_array().unwrap().len(), 3);
}

#[test]
fn schur_split_identity_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "i.json", &json!({"entries": {"rows": 2, "cols": 2, "re": [1.0, 0.0, 0.0, 1.0], "im": [0.0, 0.0, 0.0, 0.0]}}));
    let out = osgt(&["schur-split", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["results"]["cost"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn hnorm_rank_one_is_product_of_norms() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(5);
    let a = gaussian_matrix(&mut r, 2, 3);
    let b = gaussian_matrix(&mut r, 3, 2);
    let w = TensorRep::new(vec![a.clone()], vec![b.clone()]).unwrap();
    let p = write(dir.path(), "w.json", &w);
    let out = osgt(&["hnorm", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let got = report(&out)["results"]["value"].as_f64().unwrap();
    let norm = |m: &ComplexMatrix| osgt::linalg::singular_values(m)[0];
    let want = norm(&a) * norm(&b);
    assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
}

#[test]
fn csv_output_flattens_report() {
    let out = osgt(&["--format", "csv", "schur-profile", "--kmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("results[0].lp_cost,"));
    assert!(text.contains("status,pass"));
}

#[test]
fn fock_verify_small_space() {
    let out = osgt(&["fock-verify", "--m", "2", "--D", "3", "--lambda", "0.5,2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    // Two letters per weight: 1 + 4 + 16 + 64.
    assert_eq!(r["results"]["dim"], 85);
    assert!(r["results"]["worst_pairing_error"].as_f64().unwrap() < 1e-14);
}

#[test]
fn cbform_of_trace_form() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", &BilinearForm::trace_form(2));
    let out = osgt(&["cbform", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out)["results"]["value"].as_f64().unwrap();
    assert!(v > 0.0 && v.is_finite());
}

#[test]
fn oh_interp_on_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = ComplexMatrix::zeros(3, 3);
    for (i, w) in [0.6, 0.3, 0.1].iter().enumerate() {
        f[(i, i)] = c(*w, 0.0);
    }
    let map = OHMap::hilbert_schmidt_embedding(&f).unwrap();
    let x = gaussian_matrix(&mut rng(9), 3, 3);
    let input = json!({
        "map": map,
        "state": osgt::linalg::MatrixJson::from(&f),
        "x": osgt::linalg::MatrixJson::from(&x),
        "t": 4.0,
        "k": 1.0,
    });
    let p = write(dir.path(), "interp.json", &input);
    let out = osgt(&["oh-interp", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["checks"]["tail_row"], true);
}

#[test]
fn oh_log_on_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let f = identity(2).map(|z| z * 0.5);
    let map = OHMap::hilbert_schmidt_embedding(&f).unwrap();
    let xs: Vec<_> = (0..3).map(|k| osgt::linalg::MatrixJson::from(&matrix_unit(2, 2, k % 2, (k + 1) % 2))).collect();
    let p = write(dir.path(), "log.json", &json!({"map": map, "xs": xs, "k": 1.0}));
    let out = osgt(&["oh-log", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_json_reports_position_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"left\": [\n    oops\n").unwrap();
    let out = osgt(&["hnorm", s(&p)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn inconsistent_shapes_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let w = json!({
        "left": [{"rows": 2, "cols": 2, "re": [1.0, 0.0, 0.0, 1.0], "im": [0.0, 0.0, 0.0, 0.0]}],
        "right": [],
    });
    let p = write(dir.path(), "w.json", &w);
    assert_eq!(osgt(&["hnorm", s(&p)]).status.code(), Some(3));
    assert_eq!(osgt(&["hnorm", "/nonexistent/input.json"]).status.code(), Some(3));
    assert_eq!(osgt(&["--tol", "-1", "schur-profile"]).status.code(), Some(3));
    assert_eq!(osgt(&["no-such-command"]).status.code(), Some(3));
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", &BilinearForm::trace_form(2));
    let run = || {
        let mut r = report(&osgt(&["--seed", "7", "--restarts", "2", "jcb", s(&p)]));
        r.as_object_mut().unwrap().remove("wall_time_seconds");
        r
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("r.json");
    let out = osgt(&["--out", s(&o), "schur-profile", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&o).unwrap()).unwrap();
    assert_eq!(r["command"], "schur-profile");
}
