use std::path::Path;
use std::process::{Command, Output};

use unipoly::Scalar;
use unipoly_cli::format::{self, CertificateDoc};

fn unipoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unipoly")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn qd_file_has_27_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = unipoly(&["build", "qd", "--dim", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let c = format::read_config(&dir.path().join("qd3.config.json")).unwrap();
    assert_eq!(c.len(), 27);
    let manifest: format::RunManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("qd3.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.timing, None);
    assert_eq!(manifest.outputs.len(), 3);
}

#[test]
fn coor_point_is_built_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = unipoly(&["build", "coor", "--point", "sqrt2,1,1", "--field", "x^2-2:[1,2]", "--out", d]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c = format::read_config(&dir.path().join("coor.config.json")).unwrap();
    let hit = c.iter().any(|(_, x)| {
        &x[0] * &x[0] == Scalar::from_int(2) && x[0].is_positive() && x[1] == Scalar::one() && x[2] == Scalar::one()
    });
    assert!(hit);
    let o = unipoly(&["check", "certificate", "--config", &p(dir.path(), "coor.config.json"), "--cert", &p(dir.path(), "coor.cert.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("result: pass\n"));
}

#[test]
fn tampered_certificate_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    unipoly(&["build", "qd", "--dim", "3", "--out", d]);
    let cert_path = dir.path().join("qd3.cert.json");
    let mut doc: CertificateDoc = serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    let cert = doc.to_certificate().unwrap();
    let mut bad = cert.clone();
    bad.steps.swap(0, 1);
    let first = &cert.steps[0];
    bad.steps[1] = first.clone();
    bad.steps[1].target = cert.steps[1].target.clone();
    doc.steps = bad.to_lines();
    format::write_doc(&cert_path, &doc).unwrap();
    let o = unipoly(&["check", "certificate", "--config", &p(dir.path(), "qd3.config.json"), "--cert", &p(dir.path(), "qd3.cert.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("first mismatch"));
}

#[test]
fn kstacked_check_passes() {
    let o = unipoly(&["check", "lemma-dist2", "--k", "5", "--samples", "50", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let worst: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("worst lower bound: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(worst >= 2f64.powi(-14));
}

#[test]
fn gadget_check_passes() {
    let o = unipoly(&["check", "gadgets", "--trials", "200", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violations: 0"));
}

#[test]
fn render_add_gadget() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = unipoly(&["build", "arrangement", "--op", "add", "--point", "2,3", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let svg_path = p(dir.path(), "add.svg");
    let o = unipoly(&[
        "render",
        &p(dir.path(), "arrangement.config.json"),
        "--cert",
        &p(dir.path(), "arrangement.cert.json"),
        "--out",
        &svg_path,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches(r#"class="grid""#).count(), 9);
    assert_eq!(svg.matches(r#"class="input""#).count(), 2);
    assert_eq!(svg.matches(r#"class="output""#).count(), 1);
}

#[test]
fn render_vanishing_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = unipoly(&["build", "arrangement", "--poly", "x^2-2", "--point", "sqrt2", "--field", "x^2-2:[1,2]", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let prov = std::fs::read_to_string(dir.path().join("arrangement.provenance.json")).unwrap();
    assert!(prov.contains(" at 0"));
    let o = unipoly(&["render", &p(dir.path(), "arrangement.config.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#"class="output""#));
}

#[test]
fn render_empty_and_spatial() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    format::write_doc(&empty, &format::ConfigDoc::from_config(&unipoly::PointConfiguration::new(2))).unwrap();
    let o = unipoly(&["render", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("</svg>"));
    unipoly(&["build", "qd", "--dim", "3", "--out", dir.path().to_str().unwrap()]);
    let q3 = p(dir.path(), "qd3.config.json");
    assert_eq!(unipoly(&["render", &q3]).status.code(), Some(2));
    assert_eq!(unipoly(&["render", &q3, "--plane", "0,1"]).status.code(), Some(0));
}

#[test]
fn usage_and_infeasibility_exit_2() {
    assert_eq!(unipoly(&["build", "nonsense"]).status.code(), Some(2));
    assert_eq!(unipoly(&["build", "qd"]).status.code(), Some(2));
    assert_eq!(unipoly(&["build", "ball", "--eps", "1/100000"]).status.code(), Some(2));
    assert_eq!(unipoly(&["check", "certificate", "--config", "/nonexistent.json", "--cert", "x"]).status.code(), Some(2));
}

#[test]
fn shephard_scale_report() {
    let o = unipoly(&["report", "shephard", "--k", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("bound: 2^-34/9 = 1/154618822656"));
    assert!(text.contains("infeasible"));
}

#[test]
fn lawrence_and_subdirect_builds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = unipoly(&["build", "lawrence", "--shape", "tetrahedron", "--free", "1,1,1", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let l = format::read_polytope(&dir.path().join("lawrence.poly.json")).unwrap();
    assert_eq!((l.dim(), l.vertex_count()), (4, 6));
    let o = unipoly(&["build", "subdirect", "--shape", "cube", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let prov = std::fs::read_to_string(dir.path().join("subdirect.provenance.json")).unwrap();
    assert!(prov.contains("equivalent to the input: true"));
    let o = unipoly(&["report", &p(dir.path(), "lawrence.poly.json")]);
    assert!(stdout(&o).contains("f-vector: [6,"));
}

#[test]
fn polytope_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tetra.poly");
    format::write_doc(&path, &format::PolytopeDoc::from_polytope(&unipoly::hull::shapes::simplex(3))).unwrap();
    let o = unipoly(&["build", "universal", "--polytope", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("universal.manifest.json")).unwrap();
    assert!(manifest.contains("tetra.poly"));
}
