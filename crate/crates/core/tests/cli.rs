use std::path::Path;
use std::process::{Command, Output};

fn hannay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hannay")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["predict", "simulate", "fig1", "fig2", "fig3", "sweep", "convergence", "verify"] {
        let o = hannay(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
    assert_eq!(hannay(&["--help"]).status.code(), Some(0));
    assert_eq!(hannay(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn predict_reports_cone_values() {
    let o = hannay(&["predict", "--theta", "1.0471975511965976"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&stdout(&o), "cos_phi") + 1.0).abs() < 1e-12);
    let o = hannay(&["predict", "--theta", "0"]);
    assert!((value(&stdout(&o), "cos_phi") - 1.0).abs() < 1e-12);
}

#[test]
fn predict_rejects_out_of_range_theta() {
    let o = hannay(&["predict", "--theta", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DomainError"), "{}", stderr(&o));
}

#[test]
fn predict_reads_a_loop_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("theta,phi\n");
    for i in 0..=200 {
        body += &format!("{},{}\n", std::f64::consts::FRAC_PI_3, std::f64::consts::TAU * i as f64 / 200.0);
    }
    let file = write(dir.path(), "loop.csv", &body);
    let o = hannay(&["predict", "--loop", &file]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((value(&stdout(&o), "cos_phi") + 1.0).abs() < 1e-9);
}

#[test]
fn sweep_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = hannay(&["sweep", "--points", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_identical_csv_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let o = hannay(&[
            "sweep", "--theta-min", "0.1", "--theta-max", "0.2", "--points", "2", "--workers", workers,
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
        std::fs::read_to_string(out).unwrap()
    };
    let one = run("1", "a.csv");
    let two = run("2", "b.csv");
    assert_eq!(one, two);
    assert_eq!(one.lines().count(), 3);
    assert!(one.starts_with("theta,"));
}

#[test]
fn fig3_outside_tolerance_exits_with_one() {
    let o = hannay(&["fig3", "--theta", "1.0471975511965976", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status=FAIL"));
}

#[test]
fn simulate_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"variant": "fixed_anisotropy", "omega_zero": 1}"#);
    let o = hannay(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omega_zero"), "{}", stderr(&o));
}

#[test]
fn simulate_reports_guard_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"variant": "fixed_anisotropy", "omega0": 0.2, "r0": [1, 0, 0], "v0": [0, 0.01, 0],
            "r_min_guard": 0.05, "orbits": 2}"#,
    );
    let o = hannay(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("MinRadiusViolation") && err.contains("t ="), "{err}");
}

#[test]
fn simulate_fixed_anisotropy_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"variant": "fixed_anisotropy", "omega0": 0.2, "r0": [1, 0, 0.01], "v0": [0, 0.75, 0], "orbits": 20}"#,
    );
    let o = hannay(&["simulate", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("apsis_drift=") && text.contains("z_envelope_last="), "{text}");
    let traj = std::fs::read_to_string(csv).unwrap();
    assert!(traj.starts_with("t,x,y,z,px,py,pz,energy"));
    assert!(traj.lines().count() > 10);
}

#[test]
fn verify_coriolis_passes() {
    let o = hannay(&["verify", "--suite", "coriolis"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}
