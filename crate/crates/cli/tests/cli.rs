//! Black-box checks of the documented CLI behaviors beyond the
//! acceptance gate: row counts, sentinel values, and manifest contents.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_parastab")
}

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(bin())
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn sweep_row_count_and_subcritical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sweep": {"base": {"alpha":1.0,"mu":0.0,"sigma":2.0,"k":0.0,"l":0.0},
        "axes": [{"name":"sigma","values":[0.5,1.0,1.5,2.0,3.0]},{"name":"l","values":[-3.0,-2.0,0.0]}]}}"#;
    let out = run("sweep", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 15);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (sigma, closed, numeric) = (cols[2], cols[5], cols[6]);
        if sigma <= 1.0 {
            assert_eq!(closed, 0.0, "sigma = {sigma} must not pass: {row}");
            assert_eq!(numeric, 0.0, "sigma = {sigma} must not pass numerically: {row}");
        }
    }
}

#[test]
fn zero_initial_data_gives_zero_decay_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"simulate": {"equation": {"dimension":1,"reaction":{"mode":"power_law",
        "b0":0.0,"k":0.0,"s":0.0,"mu":0.0,"alpha":1.0,"c0":1.0,"l":0.0,"m":0.0,"sigma":3.0,"nu":0.0}},
        "grid":{"r_max":4.0,"cells":64},"initial":{"kind":"zero"},
        "dt":1e-2,"t_final":0.5,"probe_radius":1.0,"sample_every":10}}"#;
    let out = run("simulate", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], 0.0, "{row}");
        assert_eq!(cols[2], 0.0, "{row}");
    }
}

#[test]
fn envelope_emits_inf_sentinel_below_first_dyadic_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"envelope": {"g":{"family":"power","c0":1.0,"a":3.0},
        "h":{"family":"power","c0":1.0,"a":2.0},"p":{"family":"power","c0":1.0,"a":0.0},
        "theta":2.0,"probe_radius":1.0,"t_grid":[1.0,3.9]}}"#;
    let out = run("envelope", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("envelope.csv")).unwrap();
    for row in csv.lines().skip(1) {
        assert!(row.ends_with(",inf"), "{row}");
    }
}

#[test]
fn stationary_manifest_reports_small_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"stationary": {"equation": {"dimension":3,"reaction":{"mode":"power_law",
        "b0":0.0,"k":0.0,"s":0.0,"mu":0.0,"alpha":1.0,"c0":1.0,"l":-4.0,"m":0.0,"sigma":2.0,"nu":0.0}},
        "a_lo":0.05,"a_hi":0.5,"r_max":200.0,
        "options":{"rtol":1e-10,"blowup_factor":1e6,"plateau_factor":1e-3,"max_steps":2000000,"max_step":0.05}}}"#;
    let out = run("stationary", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["extra"]["found"], true);
    let residual = manifest["extra"]["residual"].as_f64().unwrap();
    assert!(residual < 1e-4, "residual {residual}");
    assert!(dir.path().join("witness.csv").exists());
}

#[test]
fn check_accepts_raw_structure_triple() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"check": {"triple": {
        "g": {"family":"power","c0":1.0,"a":2.0},
        "h": {"family":"power","c0":1.0,"a":2.0},
        "p_radial": {"family":"power","c0":1.0,"a":0.0},
        "theta": 2.0}}}"#;
    let out = run("check", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "stabilizes");
    assert_eq!(report["q"]["status"], "divergent");
}

#[test]
fn theta_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"check": {"power_family": {"alpha":1.0,"mu":0.0,"sigma":2.0,"k":0.0,"l":0.0}}}"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["--theta", "3.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["theta"], 3.0);
}
