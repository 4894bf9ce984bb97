//! End-to-end tests of the `rlforge` binary: exit codes, stage chaining,
//! and the printed summaries.

use std::path::Path;
use std::process::{Command, Output};

fn rlforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let out_dir = dir.join("out");
    let config = format!(
        r#"
[run]
out_dir = "{}"

[scene]
seed = 5

[scene.radar]
tx_count_used = 1
rx_count = 8
chirps_per_tx = 32
samples_per_chirp = 128

[scene.camera]
width_px = 320
height_px = 240

[scene.uav_pose]
x = 15.0
y = 0.0
z = 25.0
pitch_deg = 90.0

[scene.timing]
duration_s = 1.0
radar_frames = 2
camera_frames = 4
camera_clock_offset_s = 0.012

[[scene.objects]]
name = "walker"
class = "pedestrians"
start = [12.0, 0.0]
velocity = [0.5, 0.0]
scatterers = [{{ offset_m = [0.0, 0.0], amplitude = 1.0 }}]

[grid]
origin_x = 5.0
origin_y = -8.0
cell_size_m = 0.25
nx = 80
ny = 64

[eval]
iou_thresholds = [0.5]
"#,
        out_dir.display()
    );
    let path = dir.join("campaign.toml");
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn full_chain_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let config = config.to_str().unwrap();

    // Stages demand their inputs: processing before simulating fails with
    // the missing-input exit code.
    let premature = rlforge(&["process", "--config", config]);
    assert_eq!(premature.status.code(), Some(3), "{premature:?}");

    for stage in ["simulate", "process", "fuse", "evaluate", "report"] {
        let output = rlforge(&[stage, "--config", config]);
        assert_eq!(
            output.status.code(),
            Some(0),
            "{stage} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let report = rlforge(&["report", "--config", config]);
    let stdout = String::from_utf8(report.stdout).unwrap();
    assert!(stdout.contains("frames: 2"), "unexpected report: {stdout}");
    assert!(stdout.contains("duration: 1 s"), "unexpected report: {stdout}");
    assert!(
        stdout.contains("pedestrians: total 2, detected 2, mapped 2"),
        "unexpected report: {stdout}"
    );

    let evaluate = rlforge(&["evaluate", "--config", config]);
    let stdout = String::from_utf8(evaluate.stdout).unwrap();
    assert!(stdout.contains("mAP @ IoU 0.50"), "unexpected metrics: {stdout}");

    // The emitted dataset landed under the configured output directory.
    let manifest = dir.path().join("out/fuse/dataset/manifest.jsonl");
    assert!(manifest.is_file());
}

#[test]
fn missing_config_exits_with_the_missing_input_code() {
    let output = rlforge(&["simulate", "--config", "/nonexistent/campaign.toml"]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("rlforge simulate"), "stderr: {stderr}");
}

#[test]
fn broken_config_exits_with_the_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[nosuch]\nx = 1\n").unwrap();
    let output = rlforge(&["report", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn cli_overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let config = config.to_str().unwrap();
    let other_out = dir.path().join("elsewhere");
    let other_out = other_out.to_str().unwrap();

    let output = rlforge(&[
        "simulate", "--config", config, "--out", other_out, "--seed", "9", "--jobs", "1",
    ]);
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(Path::new(other_out).join("sim/truth.jsonl").is_file());
    assert!(!dir.path().join("out").exists(), "default out_dir must stay untouched");
}
