use std::path::Path;
use std::process::{Command, Output};

use hmflow_core::cli::report::read_profile;
use hmflow_core::entropy_diagnostics::{default_radii, frequency};
use hmflow_core::profile_ode::{shoot, ShootingOptions, Target};
use hmflow_core::weighted_geometry::RadialGrid;

fn hmflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shoot_trivial_and_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = hmflow(&["shoot", "--a", "0"], d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let rep = json(&a.join("shoot.json"));
    assert_eq!(rep["results"]["alpha_inf"], 0.0);
    assert_eq!(rep["checks"]["alpha_finite"], true);
    for f in ["profile.csv", "shoot.json", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("profile.csv")).unwrap();
    assert!(csv.starts_with("# manifest_sha256="));
    assert!(csv.contains("\nrho,h,dh,energy_density,f\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn malformed_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "[grid]\nnodez = 10\n").unwrap();
    let o = hmflow(&["shoot", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.nodez"));
    let o = hmflow(&["shoot", "--override", "run.n=2"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.n"));
}

#[test]
fn hyperbolic_blow_up_is_a_solver_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hmflow(&["shoot", "--a", "3", "--override", "run.target=hyperbolic"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn round_trip_preserves_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hmflow(&["shoot", "--a", "0.7"], tmp.path()).status.code(), Some(0));
    let q = read_profile(&tmp.path().join("profile.csv")).unwrap();
    let g = RadialGrid::default_layout();
    let p = shoot(0.7, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
    assert_eq!(p, q);
    let r = default_radii(&g, 20);
    let (fp, fq) = (frequency(&p, &r).unwrap(), frequency(&q, &r).unwrap());
    for (x, y) in fp.frequency.iter().zip(&fq.frequency) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn diagnose_same_file_and_mismatched_angles() {
    let tmp = tempfile::tempdir().unwrap();
    let (p1, p2) = (tmp.path().join("p1"), tmp.path().join("p2"));
    assert_eq!(hmflow(&["shoot", "--a", "1"], &p1).status.code(), Some(0));
    assert_eq!(hmflow(&["shoot", "--a", "0.5"], &p2).status.code(), Some(0));
    let f1 = p1.join("profile.csv");
    let f2 = p2.join("profile.csv");

    let d = tmp.path().join("d");
    let o = hmflow(&["diagnose", f1.to_str().unwrap(), f1.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&d.join("diagnose.json"));
    assert_eq!(rep["results"]["entropy"]["value"], 0.0);
    assert_eq!(rep["results"]["decay"]["window_empty"], true);
    assert_eq!(rep["checks"]["frequency_increasing_0"], true);

    let o = hmflow(&["diagnose", f1.to_str().unwrap(), f2.to_str().unwrap()], &tmp.path().join("e"));
    assert_eq!(o.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&o.stderr);
    let a1 = json(&p1.join("shoot.json"))["results"]["alpha_inf"].as_f64().unwrap();
    let a2 = json(&p2.join("shoot.json"))["results"]["alpha_inf"].as_f64().unwrap();
    assert!(msg.contains(&a1.to_string()) && msg.contains(&a2.to_string()), "{msg}");
}

#[test]
fn empty_sweep_warns_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hmflow(&["sweep", "--override", "sweep.a_max=0"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let sol = std::fs::read_to_string(tmp.path().join("solutions.csv")).unwrap();
    assert_eq!(sol.lines().count(), 2);
}

#[test]
fn flow_from_zero_has_zero_entropy() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hmflow(&["flow", "--alpha", "0", "--override", "flow.s_end=1", "--override", "sweep.a_max=1"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("flow.csv")).unwrap();
    let mut lines = csv.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&c| c == "entropy").unwrap();
    let mut rows = 0;
    for l in lines {
        assert_eq!(l.split(',').nth(col), Some("0.0"));
        rows += 1;
    }
    assert_eq!(rows, 50);
}

#[test]
fn spectrum_of_trivial_map() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hmflow(&["spectrum", "--override", "shoot.a=0", "--override", "spectrum.k=2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&tmp.path().join("spectrum.json"));
    let l0 = rep["results"]["eigenvalues"][0].as_f64().unwrap();
    assert!((l0 - 2.0).abs() < 1e-4, "{l0}");
}
