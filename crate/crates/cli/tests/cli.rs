use std::path::Path;
use std::process::{Command, Output};

use admesh::io::{mesh_from_json, mesh_to_json, poly_to_json};
use admesh::polyspace::{Poly, PolySpace, Provenance};
use admesh::geometry::BBox;
use serde_json::Value;

fn admesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admesh")).args(args).env_remove("ADMESH_SEED").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("JSON on stderr")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_domain(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_star_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let disk = write_domain(dir.path(), "disk.json", r#"{"schema":1,"kind":"disk","center":[0,0],"radius":1}"#);
    let out = dir.path().join("m.json");
    let svg = dir.path().join("m.svg");
    let o = admesh(&["generate", "--domain", &disk, "--construction", "star", "--degree", "8", "--out", p(&out), "--svg", p(&svg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["provenance"]["construction"], "star");
    assert_eq!(v["provenance"]["h"], 1.0 / 16.0);
    let mesh = mesh_from_json(&text).unwrap();
    assert_eq!(mesh.degree, 8);
    // written again, the file is byte-identical
    assert_eq!(mesh_to_json(&mesh).unwrap(), text);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn generate_c11_records_parameters() {
    let o = admesh(&["generate", "--construction", "c11", "--degree", "8", "--delta", "0.3", "--lambda", "2", "--mu", "4"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let prov = &v["provenance"];
    assert_eq!(prov["construction"], "c11");
    assert_eq!(prov["delta"], 0.3);
    assert_eq!(prov["lambda"], 2.0);
    assert_eq!(prov["mu"], 4.0);
    let m_n = prov["m_n"].as_u64().unwrap();
    assert_eq!(m_n, (16.0 * std::f64::consts::PI).ceil() as u64 + 1);
    assert_eq!(prov["levels"].as_array().unwrap().len() as u64, m_n + 1);
}

#[test]
fn mu_two_is_a_usage_error() {
    let o = admesh(&["generate", "--construction", "c11", "--degree", "8", "--delta", "0.3", "--mu", "2"]);
    assert_eq!(code(&o), 2);
    let e = stderr_json(&o);
    assert_eq!(e["message"], "mu must exceed 2");
    assert_eq!(e["schema"], 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_flags_and_files_exit_two() {
    assert_eq!(code(&admesh(&["generate"])), 2);
    assert_eq!(code(&admesh(&["generate", "--degree", "3", "--construction", "hexagon"])), 2);
    let o = admesh(&["verify", "--mesh", "/nonexistent/mesh.json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "io");
    let dir = tempfile::tempdir().unwrap();
    let odd = write_domain(dir.path(), "d.json", r#"{"schema":1,"kind":"disk","center":[0,0],"radius":1,"colour":"red"}"#);
    let o = admesh(&["generate", "--domain", &odd, "--degree", "3"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "json");
    let v2 = write_domain(dir.path(), "v2.json", r#"{"schema":2,"kind":"disk","center":[0,0],"radius":1}"#);
    assert_eq!(code(&admesh(&["generate", "--domain", &v2, "--degree", "3"])), 2);
}

#[test]
fn verify_star_mesh_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    assert_eq!(code(&admesh(&["generate", "--degree", "4", "--out", p(&mesh)])), 0);
    let o = admesh(&["verify", "--mesh", p(&mesh), "--trials", "300", "--lp"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = stdout_json(&o);
    let ratio = r["norming"]["ratio"].as_f64().unwrap();
    let lp = r["lp"]["value"].as_f64().unwrap();
    assert!(ratio >= 1.0 && ratio <= 4.8284, "{ratio}");
    assert!(lp <= 4.8284, "{lp}");
    assert!(r["lp_grid_ratio"].as_f64().unwrap() <= lp * (1.0 + 1e-6));
    assert!(r["violations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_fails_without_the_outer_layers() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.json");
    assert_eq!(code(&admesh(&["generate", "--degree", "6", "--out", p(&full)])), 0);
    let mut mesh = mesh_from_json(&std::fs::read_to_string(&full).unwrap()).unwrap();
    let keep: Vec<usize> = (0..mesh.cardinality()).filter(|&i| mesh.points[i][0].hypot(mesh.points[i][1]) <= 0.5).collect();
    mesh.points = keep.iter().map(|&i| mesh.points[i].clone()).collect();
    mesh.layers = None;
    let cut = dir.path().join("cut.json");
    std::fs::write(&cut, mesh_to_json(&mesh).unwrap()).unwrap();
    let o = admesh(&["verify", "--mesh", p(&cut), "--trials", "100"]);
    assert_eq!(code(&o), 1);
    let r = stdout_json(&o);
    assert_eq!(r["violations"][0]["kind"], "norming_ratio");
    assert!(r["norming"]["ratio"].as_f64().unwrap() > 4.8284);
}

#[test]
fn verify_is_deterministic_and_reads_the_seed_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    assert_eq!(code(&admesh(&["generate", "--degree", "3", "--out", p(&mesh)])), 0);
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_admesh"))
            .args(["verify", "--mesh", p(&mesh), "--trials", "50"])
            .env("ADMESH_SEED", "77")
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["seed"], 77);
    // an explicit flag wins over the environment
    let c = Command::new(env!("CARGO_BIN_EXE_admesh"))
        .args(["verify", "--mesh", p(&mesh), "--trials", "50", "--seed", "5"])
        .env("ADMESH_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&c)["seed"], 5);
}

#[test]
fn verify_accepts_csv_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    assert_eq!(code(&admesh(&["generate", "--degree", "3", "--out", p(&csv)])), 0);
    let o = admesh(&["verify", "--mesh", p(&csv), "--degree", "3", "--trials", "50"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["construction"], "external");
    assert_eq!(r["claimed_constant"], 2.0 * (2f64.sqrt() + 1.0));
    assert_eq!(code(&admesh(&["verify", "--mesh", p(&csv)])), 2);
}

#[test]
fn approximate_exp_on_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let svg = dir.path().join("e.svg");
    let poly = dir.path().join("p.json");
    let o = admesh(&[
        "approximate", "--target", "exp", "--degrees", "2,4,6,8", "--trials", "50",
        "--csv", p(&csv), "--svg", p(&svg), "--out", p(&poly),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    let errors: Vec<f64> = table.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let fit = admesh::io::poly_from_json(&std::fs::read_to_string(&poly).unwrap()).unwrap();
    assert_eq!(fit.space().degree(), 8);
    assert!((fit.eval(&[0.3, -0.2]) - 0.1f64.exp()).abs() < 1e-5);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<path"));
}

#[test]
fn approximate_reproduces_a_polynomial_target() {
    let dir = tempfile::tempdir().unwrap();
    let space = std::sync::Arc::new(PolySpace::new(3, BBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap());
    let coeffs: Vec<f64> = (0..space.len()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    let target = Poly::new(space, coeffs).unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, poly_to_json(&target).unwrap()).unwrap();
    let o = admesh(&["approximate", "--target-poly", p(&path), "--degrees", "3,4", "--trials", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["error"].as_f64().unwrap() <= 1e-9, "{row}");
    }
}

#[test]
fn approximate_unknown_target() {
    let o = admesh(&["approximate", "--target", "sinc"]);
    assert_eq!(code(&o), 2);
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("sinc"));
}

#[test]
fn compare_on_the_disk() {
    let o = admesh(&["compare", "--degrees", "4,8,16"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let slopes = &v["slopes"];
    let slope = |k: &str| slopes[k]["slope"].as_f64().unwrap();
    assert!((slope("baseline") - 4.0).abs() < 0.2);
    for k in ["star", "star_refined", "c11"] {
        assert!((slope(k) - 2.0).abs() < 0.3, "{k}: {}", slope(k));
    }
    for row in v["rows"].as_array().unwrap() {
        assert!(row["star_refined"].as_u64().unwrap() <= row["star"].as_u64().unwrap());
    }
    let single = stdout_json(&admesh(&["compare", "--degrees", "8"]));
    assert!(single.get("slopes").is_none());
    assert_eq!(single["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn fekete_extracts_the_space_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    assert_eq!(code(&admesh(&["generate", "--degree", "5", "--out", p(&mesh)])), 0);
    let o = admesh(&["fekete", "--mesh", p(&mesh)]);
    assert_eq!(code(&o), 0);
    let fek = mesh_from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(fek.cardinality(), 21);
    assert_eq!(fek.provenance, Provenance::Fekete { source: "star".into() });
    let o = admesh(&["fekete", "--mesh", p(&mesh), "--degree", "2"]);
    assert_eq!(mesh_from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap().cardinality(), 6);
}

#[test]
fn ellipse_domain_file() {
    let dir = tempfile::tempdir().unwrap();
    let ell = write_domain(dir.path(), "e.json", r#"{"schema":1,"kind":"ellipse","center":[0,0],"a":2,"b":1}"#);
    let o = admesh(&["generate", "--domain", &ell, "--construction", "c11", "--degree", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["provenance"]["delta"], 0.45);
    // delta beyond the reach
    let o = admesh(&["generate", "--domain", &ell, "--construction", "c11", "--degree", "3", "--delta", "0.6"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "invalid_parameter");
}
