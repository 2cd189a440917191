use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ase(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ase"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn constant_config(level: f64) -> String {
    format!(
        r#"{{"signal": {{"waveform": {{"kind": "constant", "level": {level}}}, "duration": {}}}}}"#,
        10.0 / 3000.0 + 1e-9
    )
}

#[test]
fn constant_input_writes_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = ase(dir.path(), &constant_config(3.0), &["encode"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/spikes.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == rows[0].split(',').nth(1)));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/spikes.json")).unwrap()).unwrap();
    assert_eq!(meta["windows"], 10);
    assert_eq!(meta["run_config"]["signal"]["waveform"]["level"], 3.0);
}

#[test]
fn sub_threshold_input_leaves_bins_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = ase(dir.path(), &constant_config(0.05), &["encode"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/spikes.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|r| r.ends_with(',')));
}

#[test]
fn decode_reads_encode_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sft": {"decoder": {"kind": "endpoint"}},
                  "signal": {"waveform": {"kind": "constant", "level": 2.0}, "duration": 0.002}}"#;
    assert!(ase(dir.path(), cfg, &["encode"]).status.success());
    let spikes = dir.path().join("out/spikes.csv");
    let out = ase(dir.path(), cfg, &["decode", "--input", spikes.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/decoded.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("window,bin,spike_time,ideal,linear"));
    for row in csv.lines().skip(1) {
        let ideal: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((ideal - 2.0).abs() < 0.05, "{row}");
    }
}

#[test]
fn invalid_config_fails_with_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out = ase(dir.path(), r#"{"encoder": {"u_min": 6.0}}"#, &["encode"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("u_min < u_max"), "{err}");
    assert!(!dir.path().join("out/spikes.csv").exists());

    let out = ase(dir.path(), r#"{"encoder": {"tau": 0.01}}"#, &["tune"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds sample_period"));

    let out = ase(dir.path(), "{}", &["encode"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[signal]"));
}

#[test]
fn sweep_constant_writes_one_file_per_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"encoder": {"tau": 6e-5, "sample_period": 1.48e-4}}"#;
    let out = ase(dir.path(), cfg, &["sweep-constant", "--thresholds", "0.1,0.9", "--points", "32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for u in ["0.1", "0.9"] {
        let csv = fs::read_to_string(dir.path().join(format!("out/errors_uth_{u}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("u_in,eps_u,eps_ts"));
        assert_eq!(csv.lines().count(), 33);
    }
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("out/sweep_constant.json")).unwrap(),
    )
    .unwrap();
    let t_max = |i: usize| summary["thresholds"][i]["t_max"].as_f64().unwrap();
    assert!(t_max(1) > t_max(0));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"noise": {"delta_u": 0.05, "seed": 1},
                  "signal": {"waveform": {"kind": "constant", "level": 4.0}, "duration": 0.02}}"#;
    assert!(ase(dir.path(), cfg, &["encode"]).status.success());
    let a = fs::read(dir.path().join("out/spikes.csv")).unwrap();
    assert!(ase(dir.path(), cfg, &["--seed", "2", "encode"]).status.success());
    let b = fs::read(dir.path().join("out/spikes.csv")).unwrap();
    assert_ne!(a, b);
    let meta = fs::read_to_string(dir.path().join("out/spikes.json")).unwrap();
    assert!(meta.contains("\"run_seed\": 2"));
}
