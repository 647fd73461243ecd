use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avsr-gauge"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| {
        panic!(
            "stderr is not JSON: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(
        &[
            "score", "--ref", "nope.txt", "--hyp", "nope.txt", "--out", "o",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_json(&out)["message"].is_string());
}

#[test]
fn bad_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("eval.toml"), "snrs = [0]\nbogus = 1\n").unwrap();
    let out = bin(&["run", "--config", "eval.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out).is_object());
}

#[test]
fn score_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.txt"), "u1\tthe cat sat\nu2\ton a mat\n").unwrap();
    fs::write(dir.path().join("h.txt"), "u1\tthe cat\nu2\ton the mat\n").unwrap();
    let out = bin(
        &[
            "score", "--ref", "r.txt", "--hyp", "h.txt", "--out", "scored",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scored/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["wer_display"], "33.33");
}

#[test]
fn report_occlusion_from_literals() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(
        &[
            "report",
            "occlusion",
            "--none",
            "15.6",
            "--initial",
            "24.6",
            "--middle",
            "27.0",
            "--dataset",
            "LRS3",
            "--system",
            "AVEC",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("57.7%") && text.contains("73.1%"), "{text}");
}
