//! Smoke tests of the command-line interface: subcommands, flags, and exit
//! codes (0 success, 2 config, 4 acceptance-style golden failures).

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plaqsim"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("plaqsim-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn spectrum_subcommand_passes_the_golden_checks() {
    let dir = temp_dir("spectrum");
    let output = bin()
        .args(["spectrum", "--out"])
        .arg(&dir)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("energy density per plaquette"));
    assert!(stdout.contains("[PASS]"));
    assert!(!stdout.contains("[FAIL]"));
    assert!(dir.join("spectrum.csv").exists());
    assert!(dir.join("manifest.json").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn evolve_subcommand_honors_config_and_format() {
    let dir = temp_dir("evolve");
    fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("experiment.toml");
    let config = "\
version = 1
g_squared = 0.2
time_grid = [0.12]
n_trot_values = [1]
r_values = [1, 2]
shots = 256
calibration_shots = 256
seed = 7
bootstrap_resamples = 10

[lattice]
num_plaquettes = 2
truncation = \"1/2\"
periodic = true
identify_top_bottom = true

[noise]
cnot_depolarizing = 0.01
readout_flip = 0.01
";
    fs::write(&config_path, config).unwrap();
    let out_dir = dir.join("out");
    let output = bin()
        .args(["evolve", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .args(["--format", "tsv"])
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    assert!(out_dir.join("evolution.tsv").exists());
    assert!(out_dir.join("exact_curve.tsv").exists());
    let text = fs::read_to_string(out_dir.join("evolution.tsv")).unwrap();
    assert!(text.starts_with("t\tn_trot\tr\tstage"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn calibrate_subcommand_writes_the_matrix() {
    let dir = temp_dir("calibrate");
    let output = bin()
        .args(["calibrate", "--seed", "3", "--out"])
        .arg(&dir)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    assert!(dir.join("calibration.csv").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_config_exits_with_the_config_code() {
    let dir = temp_dir("bad");
    fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("bad.toml");
    fs::write(&config_path, "version = 99\n").unwrap();
    let output = bin()
        .args(["spectrum", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&dir)
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));

    let output = bin()
        .args(["spectrum", "--format", "xlsx", "--out"])
        .arg(&dir)
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn print_config_round_trips() {
    let output = bin().arg("print-config").output().expect("binary runs");
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let config = plaqsim::config::ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(config, plaqsim::config::ExperimentConfig::standard());
}
