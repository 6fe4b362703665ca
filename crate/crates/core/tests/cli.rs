mod common;

use std::fs;

use common::*;

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn golden_outputs() {
    for (name, args) in GOLDEN_CASES {
        if let Err(e) = golden_check(name, args) {
            panic!("{e}");
        }
    }
}

#[test]
fn simulate_default_horizon_row_count() {
    let c = p0_config();
    let text = stdout(&["simulate", "--config", c.to_str().unwrap(), "--t1", "100", "--dt", "0.05"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,S,E,Is,Ia,Ih,R,D,Ntot,EYM,max_re_P,jacobi_class");
    assert_eq!(lines.len(), 2002);
    let last: Vec<&str> = lines[2001].split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 100.0);
    // no geometry requested: trailing columns empty
    assert_eq!(&last[9..], &["", "", ""]);
}

#[test]
fn disease_free_state_stays_put() {
    let c = p0_config();
    let text = stdout(&[
        "simulate", "--config", c.to_str().unwrap(), "--t1", "10", "--dt", "0.5", "--state", "1000,0,0,0,0,0",
    ]);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    for r in &rows {
        assert_eq!(&r[1..9], &rows[0][1..9]);
    }
}

#[test]
fn stability_schema() {
    let c = p0_config();
    let text = stdout(&["stability", "--config", c.to_str().unwrap(), "--t1", "2", "--dt", "0.5"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,max_re_P,class"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 3);
        f[0].parse::<f64>().unwrap();
        f[1].parse::<f64>().unwrap();
        assert!(["stable", "unstable", "marginal"].contains(&f[2]), "{l}");
    }
}

#[test]
fn geometry_check_reports_fd_agreement() {
    let c = p0_config();
    let text = stdout(&["geometry", "--config", c.to_str().unwrap(), "--check"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let checks = v["checks"].as_array().expect("checks array");
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true), "{checks:?}");
    assert_eq!(v["N"].as_array().unwrap().len(), 6);
}

#[test]
fn geometry_writes_file_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let c = p0_config();
    stdout(&["geometry", "--config", c.to_str().unwrap(), "--out", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["EYM"].as_f64().unwrap() > 0.0);
}

#[test]
fn band_mode_writes_point_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let c = p0_config();
    let text = stdout(&[
        "energy-surface", "--config", c.to_str().unwrap(), "--state", "0,0,0,0,0,100",
        "--axes", "3,4,5", "--grid", "0:10:11,0:10:11,0:10:11", "--rho", "0.01735", "--tol", "1e-3",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(text.contains("eym_345"), "{text}");
    let csv = fs::read_to_string(dir.path().join("eym_345.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("a1,a2,a3,EYM"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| (r[3] - 0.01735).abs() <= 1e-3));
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eym_345.json")).unwrap()).unwrap();
    assert_eq!(side["points"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn energy_surface_is_deterministic() {
    let c = p0_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        stdout(&["energy-surface", "--config", c.to_str().unwrap(), "--axes", "1,2,3", "--grid", "7", "--out", d.path().to_str().unwrap()]);
    }
    for f in ["eym_123.obj", "eym_123.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let text = fs::read_to_string(p0_config()).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["params"].as_object_mut().unwrap().remove("beta_a");
    fs::write(&path, v.to_string()).unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta_a"));
}

#[test]
fn usage_errors_exit_two() {
    let c = p0_config();
    let c = c.to_str().unwrap();
    for args in [
        vec!["simulate", "--config", c, "--state", "1,2,3"],
        vec!["energy-surface", "--config", c, "--axes", "1,1,2"],
        vec!["energy-surface", "--config", c],
        vec!["simulate", "--config", "/no/such/file.json"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn degenerate_grid_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let c = p0_config();
    let out = run(&[
        "energy-surface", "--config", c.to_str().unwrap(), "--state", "0,0,0,0,0,0",
        "--axes", "1,2,3", "--grid=-1:1:3,-1:1:3,-1:1:3", "--rho", "0.1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}
