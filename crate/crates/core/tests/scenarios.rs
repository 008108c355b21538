use diracsim::scenario::{run, ResolvedConfig, RunStatus, ScenarioConfig, ScenarioError};
use std::collections::BTreeMap;
use std::path::Path;

fn config(text: &str, dir: &Path) -> ResolvedConfig {
    let mut raw = ScenarioConfig::from_toml_str(text).unwrap();
    raw.output_dir = Some(dir.to_path_buf());
    raw.resolve().unwrap()
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

const POSITIVE: &str = r#"
scenario = "positive_branch"
[grid]
n_x = 41
n_p = 41
"#;

#[test]
fn positive_branch_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&config(POSITIVE, dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Success);
    assert!(m.metrics["entropy_drift"] < 1e-9);
    assert!(m.metrics["mean_x_correlation"] > 0.9999);
    assert!(m.metrics["min_w_t4"] < 0.0);
    let files = csv_files(dir.path());
    for name in ["trace.csv", "entropy_vs_delta_p.csv", "wigner_t4.csv", "wigner_e_t2.csv", "marginal_t0.csv"] {
        let text = String::from_utf8(files[name].clone()).unwrap();
        assert!(text.starts_with("# diracsim "), "{name}");
        assert!(text.contains(&m.provenance.param_hash), "{name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "success");
    assert_eq!(manifest["files"].as_array().unwrap().len(), m.files.len());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let text = r#"
scenario = "zitterbewegung"
model = "tomography_pipeline"
seed = 11
[times]
step = 30.0
snapshots = [330.0]
[grid]
n_x = 9
n_p = 9
[tomography]
through_rabi = true
rabi_noise_sigma = 0.01
fit_n_max = 12
"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run(&config(text, a.path())).unwrap();
    let mb = run(&config(text, b.path())).unwrap();
    assert_eq!(ma, mb);
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);

    let other = tempfile::tempdir().unwrap();
    let mc = run(&config(&text.replace("seed = 11", "seed = 12"), other.path())).unwrap();
    assert_ne!(ma.provenance.param_hash, mc.provenance.param_hash);
    assert_ne!(fa["wigner_e_t330.csv"], csv_files(other.path())["wigner_e_t330.csv"]);
}

#[test]
fn continuum_zitterbewegung_splits() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "zitterbewegung"
model = "continuum"
[times]
step = 10.0
snapshots = [0.0, 330.0]
[grid]
n_x = 61
n_p = 61
"#;
    let m = run(&config(text, dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Success);
    assert!(m.metrics["final_entropy"] > 0.9);
    assert!(m.metrics["max_analytic_deviation"] < 1e-5);
    assert_eq!(m.metrics["marginal_modes_t0"], 1.0);
    assert_eq!(m.metrics["marginal_modes_t330"], 2.0);
}

#[test]
fn klein_packets_drift_apart() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "klein"
[times]
step = 8.0
snapshots = [0.0, 216.0, 288.0]
[grid]
n_x = 61
n_p = 61
"#;
    let m = run(&config(text, dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Success);
    assert_eq!(m.metrics["distinct_snapshots"], 2.0);
    assert!(m.metrics["drag_rel_error_pos"] < 0.03);
    assert!(m.metrics["drag_rel_error_neg"] < 0.03);
    assert!(m.metrics["x_slope_pos"] * m.metrics["x_slope_neg"] < 0.0);
    let packets = String::from_utf8(std::fs::read(dir.path().join("packets.csv")).unwrap()).unwrap();
    let rows: Vec<&str> = packets.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].ends_with(",0"), "t = 0 has a single packet: {}", rows[1]);
}

#[test]
fn failed_snapshots_make_a_partial_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "klein"
[times]
step = 48.0
snapshots = [288.0]
[grid]
n_x = 21
n_p = 21
[tomography]
reconstruct = true
gamma_points = 2
"#;
    let m = run(&config(text, dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Partial);
    assert_eq!(m.failures.len(), 1);
    assert!(m.failures[0].contains("t = 288"));
}

#[test]
fn truncation_fails_the_run_with_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "zitterbewegung"
[circuit]
n_max = 9
[times]
step = 10.0
"#;
    let err = run(&config(text, dir.path())).unwrap_err();
    assert!(matches!(err, ScenarioError::Numeric(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
    let msg = manifest["failures"][0].as_str().unwrap();
    assert!(msg.contains("top Fock level"), "{msg}");
}

#[test]
fn compare_reports_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "compare"
[compare]
phase_search = false
[times]
end = 100.0
"#;
    let m = run(&config(text, dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Success);
    for key in ["max_dpe", "max_dx", "max_dentropy", "rms_dpe"] {
        assert!(m.metrics[key].is_finite(), "{key}");
    }
    assert!(!m.metrics.contains_key("opt_phi_1"));
    assert!(dir.path().join("compare.csv").exists());
}

#[test]
fn narrow_validity_margins_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "compare"
[circuit]
nu_1 = "20 MHz"
[compare]
phase_search = false
[times]
end = 20.0
"#;
    let m = run(&config(text, dir.path())).unwrap();
    assert!(m.warnings.iter().any(|w| w.contains("nu_1")), "{:?}", m.warnings);
}
