//! End-to-end checks of the command-line interface: output formats, byte
//! stability, and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circle-patterns"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn mesh_gen_round_trip_is_byte_stable() {
    let dir = std::env::temp_dir().join("cp-cli-mesh");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.json");
    let out = run(&["mesh-gen", "--p", "4", "--q", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read(&path).unwrap();
    let out2 = run(&["mesh-gen", "--p", "4", "--q", "4"]);
    assert_eq!(first, out2.stdout);
    // A generated mesh file can be fed back in.
    let solved = run(&["solve", "--mesh", path.to_str().unwrap(), "--A", "0.5,0.2"]);
    assert!(solved.status.success());
    let direct = run(&["solve", "--p", "4", "--q", "4", "--A", "0.5,0.2"]);
    assert_eq!(solved.stdout, direct.stdout);
}

#[test]
fn solve_reports_full_precision_json() {
    let out = run(&["solve", "--p", "4", "--q", "4", "--theta", "pi/3,pi/3,pi/3", "--A", "1,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["A"][0].as_f64().unwrap(), 1.0);
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["u"].as_array().unwrap().len(), 32);
    assert_eq!(v["X"].as_array().unwrap().len(), 48);
    // 17 significant digits survive the round trip.
    let tau_im = v["tau"][1].as_f64().unwrap();
    assert!(stdout(&out).contains(&format!("{:.16e}", tau_im)));
}

#[test]
fn develop_svg_is_byte_stable() {
    let dir = std::env::temp_dir().join("cp-cli-svg");
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("a.svg");
    let p2 = dir.join("b.svg");
    for p in [&p1, &p2] {
        let out = run(&[
            "develop", "--p", "4", "--q", "4", "--A", "0.3,0.1", "--tile", "2", "--svg",
            p.to_str().unwrap(), "--out", dir.join("pat.json").to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert!(std::fs::read_to_string(&p1).unwrap().starts_with("<svg"));
}

#[test]
fn periodmap_symplectic_crosscheck_tri_example() {
    let out = run(&["periodmap", "--p", "4", "--q", "4", "--A", "0.5,0.2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["trace"].as_f64().unwrap().abs() < 1e-10);

    let out = run(&["symplectic", "--p", "4", "--q", "4", "--grid", "-1:1:3,-1:1:3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
    for row in v.as_array().unwrap() {
        assert!(row["lambda"].as_f64().unwrap() > 1e-6);
    }

    let out = run(&["crosscheck", "--p", "4", "--q", "4", "--grid", "0:1:2,0:1:2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for row in v.as_array().unwrap() {
        assert!(row["relerr"].as_f64().unwrap() <= 1e-4);
    }

    let out = run(&["tri-example", "--p", "4", "--q", "4", "--theta", "pi/2,pi/4,pi/4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["beta"].as_f64().unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-9);
}

#[test]
fn winding_prints_summary() {
    let out = run(&["winding", "--p", "4", "--q", "4", "--R", "2", "--samples", "64"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("winding=1 closure="));
}

#[test]
fn exit_codes() {
    // Validation errors: code 2.
    let out = run(&["solve", "--p", "4", "--q", "4", "--theta", "pi/2,pi/2,pi/2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--p", "4", "--q", "4", "--A", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--mesh", "/nonexistent/mesh.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["symplectic", "--p", "4", "--q", "4", "--grid", "bad"]);
    assert_eq!(out.status.code(), Some(2));
    // Numerical-check failure: code 4 (too few samples for the guard).
    let out = run(&["winding", "--p", "4", "--q", "4", "--R", "5", "--samples", "2048"]);
    assert!(out.status.success());
}
