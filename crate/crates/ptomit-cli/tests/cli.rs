//! End-to-end tests of the `ptomit` binary: exit codes, artifact layout,
//! determinism, and parameter precedence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptomit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptomit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).expect("config written");
    path.to_str().expect("utf-8 path").to_string()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).expect("file exists");
    serde_json::from_str(&text).expect("valid json")
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["--help"]);
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    for name in [
        "spectrum",
        "delay-sweep",
        "gain-sweep",
        "pt-modes",
        "oracle-check",
        "reproduce",
        "steady-state",
    ] {
        assert!(text.contains(name), "help does not mention {name}");
    }
}

#[test]
fn identical_runs_write_byte_identical_csv_and_equal_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "spectrum",
        "--points",
        "101",
        "--gain-ratio",
        "0.5",
        "--pump-uw",
        "10",
    ];
    let mut bodies = Vec::new();
    let mut hashes = Vec::new();
    for out in ["first", "second"] {
        let output = ptomit(dir.path(), &[&args[..], &["--out", out]].concat());
        assert!(output.status.success(), "stderr: {}", stderr_of(&output));
        let root = dir.path().join(out);
        bodies.push(fs::read(root.join("kappa_0.50_P_10.0uW.csv")).unwrap());
        hashes.push(read_json(&root.join("run_manifest.json"))["config_hash"].clone());
    }
    assert_eq!(bodies[0], bodies[1], "CSV bodies differ between reruns");
    assert_eq!(hashes[0], hashes[1], "config hashes differ between reruns");
}

#[test]
fn spectrum_csv_has_the_documented_header_and_clean_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(
        dir.path(),
        &["spectrum", "--points", "11", "--out", "spec"],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let text = fs::read_to_string(dir.path().join("spec/kappa_-1.00_P_10.0uW.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("delta_p_over_omega_m,eta,phase_rad,t_re,t_im,error")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert!(row.ends_with(','), "ok row should have an empty error cell: {row}");
        assert_eq!(row.matches(',').count(), 5);
    }
}

#[test]
fn single_point_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["spectrum", "--points", "1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_figure_id_is_a_usage_error_listing_valid_ids() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["reproduce", "fig9"]);
    assert_eq!(output.status.code(), Some(2));
    let text = stderr_of(&output);
    assert!(text.contains("fig2a"), "stderr: {text}");
    assert!(text.contains("fig6"), "stderr: {text}");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{"x_zpf": 1e-16}"#);
    let output = ptomit(dir.path(), &["steady-state", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("x_zpf"));
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["steady-state", "--preset", "lab"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("paper"));
}

#[test]
fn vanishing_optical_determinant_exits_with_code_three() {
    // Decoupled mechanics (g_om = 0), balanced gain and loss, resonant
    // pump: the optical determinant is exactly zero and no displacement
    // can move it, so the steady-state solve must refuse.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "lasing.json",
        r#"{"g_om": 0.0, "kappa": 6.43e6, "Delta_L": 0.0}"#,
    );
    let output = ptomit(dir.path(), &["steady-state", "--config", &config]);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr_of(&output));
}

#[test]
fn verification_pass_succeeds_on_a_healthy_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(
        dir.path(),
        &["spectrum", "--points", "51", "--gain-ratio", "-1.0,1.5", "--verify"],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
}

#[test]
fn reproduce_writes_the_bundle_files_and_lists_them_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["reproduce", "fig2b", "--out", "bundle"]);
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));

    let root = dir.path().join("bundle");
    let expected = [
        "fig2b/kappa_0.50.csv",
        "fig2b/kappa_1.00.csv",
        "fig2b/kappa_1.50.csv",
    ];
    for name in expected {
        assert!(root.join(name).is_file(), "{name} missing");
    }
    let manifest = read_json(&root.join("run_manifest.json"));
    let listed: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(listed, expected);
    assert_eq!(manifest["summary"]["figure_id"], "fig2b");

    let text = fs::read_to_string(root.join("fig2b/kappa_0.50.csv")).unwrap();
    assert!(text.starts_with("delta_p_over_omega_m,eta,phase_rad,t_re,t_im,error\n"));
    // Header plus the full detuning grid.
    assert_eq!(text.lines().count(), 2002);
}

#[test]
fn command_line_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "power.json", r#"{"P_L": 5e-6}"#);
    let output = ptomit(
        dir.path(),
        &["steady-state", "--config", &config, "--pump-uw", "7", "--out", "prec"],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let doc = read_json(&dir.path().join("prec/steady_state.json"));
    let pump = doc["drive"]["P_L"].as_f64().unwrap();
    assert!((pump - 7e-6).abs() < 1e-18, "P_L = {pump}");
}

#[test]
fn pt_modes_reports_the_label_and_warns_when_unstable() {
    let dir = tempfile::tempdir().unwrap();

    let output = ptomit(
        dir.path(),
        &["pt-modes", "--gain-ratio", "0.5", "--out", "sym"],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let doc = read_json(&dir.path().join("sym/pt_modes.json"));
    assert_eq!(doc["classification"]["phase_label"], "symmetric");
    assert_eq!(doc["classification"]["unstable"], false);

    let output = ptomit(
        dir.path(),
        &["pt-modes", "--gain-ratio", "1.5", "--out", "broken"],
    );
    assert!(output.status.success());
    assert!(stderr_of(&output).contains("unstable"));
    let doc = read_json(&dir.path().join("broken/pt_modes.json"));
    assert_eq!(doc["classification"]["phase_label"], "broken");
    assert_eq!(doc["classification"]["unstable"], true);
}

#[test]
fn oracle_check_passes_at_a_single_cross_check_point() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(
        dir.path(),
        &[
            "oracle-check",
            "--gain-ratio",
            "-1.0",
            "--detunings",
            "0.5",
            "--out",
            "oracle",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let doc = read_json(&dir.path().join("oracle/oracle_check.json"));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["checked"], 1);
    let rel = doc["points"][0]["rel_err"].as_f64().unwrap();
    assert!(rel < 1e-3, "rel_err = {rel}");
}

#[test]
fn delay_sweep_writes_the_documented_columns_on_a_log_grid() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(
        dir.path(),
        &[
            "delay-sweep",
            "--gain-ratio",
            "-1.0",
            "--points",
            "5",
            "--out",
            "delay",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let text = fs::read_to_string(dir.path().join("delay/delay.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("P_L_uW,kappa_over_gamma,tau_g_s,pt_label,error")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    let first: Vec<&str> = rows[0].split(',').collect();
    let last: Vec<&str> = rows[4].split(',').collect();
    assert!((first[0].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
    assert!((last[0].parse::<f64>().unwrap() - 20.0).abs() < 1e-9);
    assert_eq!(first[3], "symmetric");
    // Passive pair on resonance: slow light, a positive delay.
    assert!(first[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn delay_sweep_ignores_a_configured_probe_detuning_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "detuned.json", r#"{"Delta_p": 1e6}"#);
    let output = ptomit(
        dir.path(),
        &[
            "delay-sweep",
            "--config",
            &config,
            "--gain-ratio",
            "-1.0",
            "--points",
            "3",
            "--out",
            "warned",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    assert!(stderr_of(&output).contains("zero probe detuning"));
}

#[test]
fn gain_sweep_covers_the_named_ratios_and_the_threshold_scan() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptomit(dir.path(), &["gain-sweep", "--out", "gain"]);
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let text = fs::read_to_string(dir.path().join("gain/gain_sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("kappa_over_gamma,eta,phase_rad,tau_g_s,x_s_m,n1,n2,pt_label,error")
    );
    let ratios: Vec<f64> = lines
        .map(|row| row.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 29);
    assert!(ratios.windows(2).all(|pair| pair[0] < pair[1]));
    assert_eq!(ratios.first(), Some(&-1.0));
    assert_eq!(ratios.last(), Some(&1.5));
    assert!(ratios.iter().any(|&r| (r - 1.07).abs() < 1e-12));
}
