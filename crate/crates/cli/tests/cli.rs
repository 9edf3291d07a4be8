//! End-to-end runs of the binary against small synthetic fixtures.

use std::path::Path;
use std::process::{Command, Output};

fn gastrowave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gastrowave"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary should run")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// 64x64 fixture; period and duration come from `extra` when the default
/// 20 s / 120 s does not fit the test.
fn synth_small(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "--size",
        "64",
        "--seed",
        "7",
        "--out-dir",
        "frames",
        "--truth",
        "truth.csv",
    ];
    args.extend_from_slice(extra);
    assert_ok(&gastrowave(&args, dir));
}

#[test]
fn period_error_prints_published_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = gastrowave(
        &["period-error", "--detected", "17.5", "--counted", "19.2"],
        dir.path(),
    );
    assert_ok(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "8.854");
}

#[test]
fn full_pipeline_recovers_the_period() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &[]);
    let out = gastrowave(
        &[
            "detect-period",
            "--input",
            "frames",
            "--out",
            "curve.csv",
            "--summary",
            "period.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("period.json")).unwrap())
            .unwrap();
    assert_eq!(summary["period_s"], serde_json::json!(20.0));
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["t_l"], serde_json::json!(10.0));
    assert_eq!(summary["t_r"], serde_json::json!(40.0));

    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("interval_s,mean_score,pair_count"));
    assert_eq!(lines.count(), 91, "5..50 s in 0.5 s steps");
}

#[test]
fn detect_period_without_periodicity_exits_one_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &["--amplitude", "0"]);
    let out = gastrowave(
        &[
            "detect-period",
            "--input",
            "frames",
            "--out",
            "curve.csv",
            "--summary",
            "period.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "NoPeriodicity");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("period.json")).unwrap())
            .unwrap();
    assert_eq!(summary["status"], "no_periodicity");
    assert!(summary["period_s"].is_null());
    // evidence curve is still written
    assert!(dir.path().join("curve.csv").exists());
}

#[test]
fn cmd_score_emits_a_row_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &["--period", "5", "--duration", "10"]);
    let out = gastrowave(
        &["cmd-score", "--input", "frames", "--out", "scores.csv"],
        dir.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "frame_index,score,if_stable");
    assert_eq!(lines[1], "0,0,true");
    assert_eq!(lines.len(), 1 + 20, "header plus one row per frame");
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{k},")), "row {k}: {line}");
        assert!(line.ends_with(",true"), "stable fixture, row {k}: {line}");
    }
}

#[test]
fn classify_replay_gate_and_evaluate_chain() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &["--period", "5", "--duration", "10"]);
    // 20 frames; scores above 0.5 in the second half
    let mut replay = String::from("frame_index,score\n");
    for k in 0..20 {
        replay.push_str(&format!("{k},{}\n", if k < 10 { 0.2 } else { 0.8 }));
    }
    std::fs::write(dir.path().join("replay.csv"), replay).unwrap();

    let out = gastrowave(
        &[
            "classify",
            "--input",
            "frames",
            "--classifier",
            "replay",
            "--replay-file",
            "replay.csv",
            "--window",
            "1",
            "--gate",
            "--out",
            "pred.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let pred = std::fs::read_to_string(dir.path().join("pred.csv")).unwrap();
    let lines: Vec<&str> = pred.lines().collect();
    assert_eq!(lines[0], "frame_index,score,label");
    assert_eq!(lines[1], "0,0.2,Nowave");
    assert_eq!(lines[11], "10,0.8,Wave");
    assert_eq!(lines.len(), 21);

    // truth agreeing with the replay labels
    let mut truth = String::from("frame_index,label\n");
    for k in 0..20 {
        truth.push_str(&format!("{k},{}\n", if k < 10 { "Nowave" } else { "Wave" }));
    }
    std::fs::write(dir.path().join("labels.csv"), truth).unwrap();
    let out = gastrowave(
        &[
            "evaluate",
            "--pred",
            "pred.csv",
            "--truth",
            "labels.csv",
            "--out",
            "metrics.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(m["accuracy"], serde_json::json!(1.0));
    assert_eq!(m["f1"], serde_json::json!(1.0));
    assert_eq!(m["auc"], serde_json::json!(1.0));
    assert_eq!(m["tp"], serde_json::json!(10));
    assert_eq!(m["tn"], serde_json::json!(10));
    assert_eq!(m["fp"], serde_json::json!(0));
    assert_eq!(m["fn"], serde_json::json!(0));
}

#[test]
fn evaluate_accepts_synth_truth_files() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &["--period", "5", "--duration", "10", "--mode", "ring"]);
    let out = gastrowave(
        &[
            "classify",
            "--input",
            "frames",
            "--window",
            "5",
            "--out",
            "pred.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let out = gastrowave(
        &[
            "evaluate",
            "--pred",
            "pred.csv",
            "--truth",
            "truth.csv",
            "--out",
            "metrics.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    // single-class truth: ranking quality undefined, accuracy still present
    assert!(m["auc"].is_null());
    assert!(m["accuracy"].is_number());
}

#[test]
fn sweep_threshold_csv_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(
        dir.path(),
        &["--period", "20", "--duration", "30", "--jitter-p", "0.3", "--noise", "2"],
    );
    let out = gastrowave(
        &[
            "sweep-threshold",
            "--input",
            "frames",
            "--thresholds",
            "0:1000:100",
            "--out",
            "sweep.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("threshold,run_count,mean_run_length"));
    let means: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 11);
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "means {means:?}");
}

#[test]
fn extract_stable_writes_loadable_run_directories() {
    let dir = tempfile::tempdir().unwrap();
    // jitter on a scaled-down frame: rescale the threshold by pixel count
    synth_small(
        dir.path(),
        &["--period", "20", "--duration", "30", "--jitter-p", "0.2", "--noise", "1"],
    );
    let scaled_threshold = format!("{}", 200.0 * (64.0 * 64.0) / (480.0 * 480.0));
    let out = gastrowave(
        &[
            "extract-stable",
            "--input",
            "frames",
            "--threshold",
            &scaled_threshold,
            "--min-length",
            "3",
            "--out-dir",
            "runs",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(!runs.is_empty(), "jittered fixture should leave some runs");
    for run in runs {
        let frame_count = std::fs::read_dir(&run)
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .ends_with(".pgm")
            })
            .count();
        assert!(frame_count >= 3, "run {run:?} shorter than min length");
    }
}

#[test]
fn error_summary_writes_stats_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("errors.csv"), "error\n1\n2\n3\n4\n").unwrap();
    let out = gastrowave(
        &[
            "error-summary",
            "--in",
            "errors.csv",
            "--out",
            "stats.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(s["mean"], serde_json::json!(2.5));
    assert_eq!(s["median"], serde_json::json!(2.5));
    assert_eq!(s["max"], serde_json::json!(4.0));
    assert_eq!(s["min"], serde_json::json!(1.0));
    assert!((s["std"].as_f64().unwrap() - 1.25f64.sqrt()).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = gastrowave(&["detect-period", "--bogus-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = gastrowave(&["no-such-command"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_directory_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gastrowave(
        &["cmd-score", "--input", "absent", "--out", "scores.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "MissingDirectory");
}

#[test]
fn synth_truth_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), &["--period", "5", "--duration", "10", "--jitter-p", "1.0"]);
    let truth = std::fs::read_to_string(dir.path().join("truth.csv")).unwrap();
    let lines: Vec<&str> = truth.lines().collect();
    assert_eq!(lines[0], "frame_index,wave_active,jittered");
    assert_eq!(lines.len(), 21);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    // frames directory carries the sidecar
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("frames/meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["fps"], serde_json::json!(2.0));
    assert_eq!(meta["width"], serde_json::json!(64));
}
