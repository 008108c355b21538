use std::path::Path;
use std::process::{Command, Output};

fn diracsim(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diracsim"));
    cmd.args(args).env_remove("DIRACSIM_OUT").env_remove("DIRACSIM_THREADS").env("RUST_LOG", "error");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const POSITIVE: &str = "scenario = \"positive_branch\"\n[grid]\nn_x = 21\nn_p = 21\n";

#[test]
fn validate_prints_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = diracsim(&["validate", &write_config(dir.path(), POSITIVE)], &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"scenario\": \"positive_branch\""), "{stdout}");
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        ("scenario = \"klein\"\n[circuit]\nlambda = 19.91\n", "circuit.lambda"),
        ("scenario = \"klein\"\n[grid]\nnx = 3\n", "grid"),
        ("scenario = \"positive_branch\"\nmodel = \"full_circuit\"\n", "model"),
        ("scenario = \"klein\"\n[circuit]\neps_2 = \"8.8 MHz\"\n", "circuit.eps_2"),
    ] {
        let out = diracsim(&["validate", &write_config(dir.path(), text)], &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(stderr.contains(field), "{text} -> {stderr}");
    }
    let out = diracsim(&["run", "/nonexistent/config.toml"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_into_the_requested_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), POSITIVE);
    let out_dir = dir.path().join("flag");
    let out = diracsim(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "--threads", "2", "--seed", "5"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 5"));

    let env_dir = dir.path().join("env");
    let out = diracsim(&["run", &cfg], &[("DIRACSIM_OUT", &env_dir)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("trace.csv").exists());
}

#[test]
fn model_override_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), POSITIVE);
    let out = diracsim(&["run", &cfg, "--model", "klein_gordon"], &[]);
    assert_ne!(out.status.code(), Some(0));
    let out = diracsim(&["run", &cfg, "--model", "effective_circuit", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"zitterbewegung\"\n[circuit]\nn_max = 9\n[times]\nstep = 30.0\n");
    let out = diracsim(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn partial_run_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"klein\"\n[times]\nstep = 48.0\nsnapshots = [288.0]\n[grid]\nn_x = 21\nn_p = 21\n\
         [tomography]\nreconstruct = true\ngamma_points = 2\n",
    );
    let out = diracsim(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_uses_the_circuit_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"klein\"\n[circuit]\neps_2 = \"0 MHz\"\nn_max = 12\n[compare]\nphase_search = false\n",
    );
    let out_dir = dir.path().join("o");
    let out = diracsim(&["compare", &cfg, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("max_dpe = "), "{stdout}");
    let header = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    assert!(header.contains("scenario=compare model=full_circuit"));
}
