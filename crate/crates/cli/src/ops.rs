//! Subcommand implementations: thin orchestration over the library plus
//! the CSV/JSON artifact formats.

use std::fs;
use std::path::{Path, PathBuf};

use gastrowave_core::frame::{load_sequence, save_sequence};
use gastrowave_core::motion::{score_sequence, GaussianMask};
use gastrowave_core::period::{
    error_summary, find_period, interval_curve, interval_curve_phase_averaged, period_error,
    IntervalGrid, PeriodicityError,
};
use gastrowave_core::pipeline::{
    classify_sequence, evaluate, gate_predictions, parse_scores_csv, HeuristicScorer, Label,
    LabeledPrediction, ReplayScorer, WaveScorer,
};
use gastrowave_core::stability::{extract_stable_runs, threshold_sweep};
use gastrowave_core::synth::{generate, JitterSpec, MucusSpec, SynthMode, SynthSpec};

use crate::error::CliError;
use crate::{AnchorKind, ClassifierKind, Command, MaskArgs, SynthModeArg};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::CmdScore {
            input,
            mask,
            threshold,
            fps,
            out,
        } => cmd_score(&input, mask, threshold, fps, &out),
        Command::ExtractStable {
            input,
            mask,
            threshold,
            min_length,
            fps,
            out_dir,
        } => extract_stable(&input, mask, threshold, min_length, fps, &out_dir),
        Command::SweepThreshold {
            input,
            mask,
            thresholds,
            fps,
            out,
        } => sweep_threshold(&input, mask, &thresholds, fps, &out),
        Command::Classify {
            input,
            classifier,
            replay_file,
            window,
            stride,
            anchor,
            gate,
            mask,
            threshold,
            fps,
            out,
        } => classify(
            &input,
            classifier,
            replay_file.as_deref(),
            window,
            stride,
            anchor,
            gate,
            mask,
            threshold,
            fps,
            &out,
        ),
        Command::Evaluate { pred, truth, out } => evaluate_files(&pred, &truth, &out),
        Command::DetectPeriod {
            input,
            fps,
            mask,
            interval_min,
            interval_max,
            interval_step,
            tl,
            tr,
            phase_average,
            out,
            summary,
        } => detect_period(
            &input,
            fps,
            mask,
            (interval_min, interval_max, interval_step),
            (tl, tr),
            phase_average,
            &out,
            &summary,
        ),
        Command::PeriodError { detected, counted } => {
            let err = period_error(detected, counted)?;
            println!("{err:.3}");
            Ok(())
        }
        Command::ErrorSummary { input, out } => error_summary_file(&input, &out),
        Command::Synth {
            mode,
            period,
            duration,
            fps,
            size,
            amplitude,
            jitter_p,
            jitter_max,
            noise_sigma,
            mucus_blobs,
            mucus_radius,
            mucus_drift,
            seed,
            out_dir,
            truth,
        } => synth(
            mode,
            period,
            duration,
            fps,
            size,
            amplitude,
            (jitter_p, jitter_max),
            noise_sigma,
            (mucus_blobs, mucus_radius, mucus_drift),
            seed,
            &out_dir,
            &truth,
        ),
    }
}

fn build_mask(mask: MaskArgs) -> Result<GaussianMask, CliError> {
    Ok(GaussianMask::new(mask.mu, mask.sigma)?)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent.display().to_string()))?;
    }
    fs::write(path, text).map_err(CliError::io(path.display().to_string()))
}

fn cmd_score(
    input: &Path,
    mask: MaskArgs,
    threshold: f64,
    fps: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let seq = load_sequence(input, fps)?;
    let mask = build_mask(mask)?;
    let verdicts = score_sequence(&seq, &mask, threshold)?;
    let mut csv = String::from("frame_index,score,if_stable\n");
    // frame 0 has no predecessor and is stable by definition
    csv.push_str("0,0,true\n");
    for (k, v) in verdicts.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", k + 1, v.score, v.if_stable));
    }
    write_text(out, &csv)
}

fn extract_stable(
    input: &Path,
    mask: MaskArgs,
    threshold: f64,
    min_length: usize,
    fps: Option<f64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let seq = load_sequence(input, fps)?;
    let mask = build_mask(mask)?;
    let verdicts = score_sequence(&seq, &mask, threshold)?;
    let runs = extract_stable_runs(&verdicts, min_length)?;
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir.display().to_string()))?;
    for (k, run) in runs.iter().enumerate() {
        let sub = out_dir.join(format!("run_{k:03}"));
        let slice = seq
            .slice(run.start_index, run.length)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        save_sequence(&slice, &sub)?;
        println!(
            "run_{k:03}: start {} length {}",
            run.start_index, run.length
        );
    }
    println!("{} runs kept (min length {min_length})", runs.len());
    Ok(())
}

/// Accepts `start:stop:step` ranges or comma-separated explicit lists.
fn parse_thresholds(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Invalid(format!("--thresholds {text:?}: {msg}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step".into()));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad("need stop >= start and step > 0".into()));
        }
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let t = start + k as f64 * step;
            if t > stop + 1e-9 {
                break;
            }
            out.push(t);
            k += 1;
        }
        Ok(out)
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect()
    }
}

fn sweep_threshold(
    input: &Path,
    mask: MaskArgs,
    thresholds: &str,
    fps: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let seq = load_sequence(input, fps)?;
    let mask = build_mask(mask)?;
    let thresholds = parse_thresholds(thresholds)?;
    let points = threshold_sweep(&seq, &mask, &thresholds)?;
    let mut csv = String::from("threshold,run_count,mean_run_length\n");
    for p in &points {
        csv.push_str(&format!(
            "{},{},{}\n",
            p.threshold, p.run_count, p.mean_run_length
        ));
    }
    write_text(out, &csv)
}

#[allow(clippy::too_many_arguments)]
fn classify(
    input: &Path,
    classifier: ClassifierKind,
    replay_file: Option<&Path>,
    window: usize,
    stride: usize,
    anchor: AnchorKind,
    gate: bool,
    mask: MaskArgs,
    threshold: f64,
    fps: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let seq = load_sequence(input, fps)?;
    let anchor_offset = match anchor {
        AnchorKind::Last => window.saturating_sub(1),
        AnchorKind::Center => window.saturating_sub(1) / 2,
        AnchorKind::First => 0,
    };
    let cfg = gastrowave_core::pipeline::WindowConfig::with_anchor(window, stride, anchor_offset)?;

    let scorer: Box<dyn WaveScorer> = match classifier {
        ClassifierKind::Heuristic => Box::new(HeuristicScorer::new()),
        ClassifierKind::Replay => {
            let path = replay_file.ok_or_else(|| {
                CliError::Invalid("--classifier replay needs --replay-file".into())
            })?;
            let contents =
                fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
            let scorer = ReplayScorer::from_csv(&contents)?;
            scorer.check_frame_count(seq.len())?;
            Box::new(scorer)
        }
    };

    let mut preds = classify_sequence(&seq, &cfg, scorer.as_ref())?;
    if gate {
        let mask = build_mask(mask)?;
        let verdicts = score_sequence(&seq, &mask, threshold)?;
        preds = gate_predictions(&preds, &verdicts)?;
    }

    let mut csv = String::from("frame_index,score,label\n");
    for p in &preds {
        csv.push_str(&format!("{},{},{}\n", p.frame_index, p.score, p.label));
    }
    write_text(out, &csv)
}

/// Truth files: either `frame_index,label` (labels as Wave/Nowave/0/1) or a
/// synth ground-truth file whose `wave_active` column is the wave label.
fn parse_truth_csv(contents: &str) -> Result<Vec<bool>, CliError> {
    let mut lines = contents.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Invalid("truth file is empty".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = fields
        .iter()
        .position(|&f| f == "wave_active" || f == "label")
        .ok_or_else(|| {
            CliError::Invalid(format!(
                "truth header needs a wave_active or label column, got {header:?}"
            ))
        })?;
    let index_col = fields.iter().position(|&f| f == "frame_index");
    let mut rows: Vec<(usize, bool)> = Vec::new();
    for (line_idx, text) in lines {
        let line = line_idx + 1;
        let cells: Vec<&str> = text.split(',').map(str::trim).collect();
        let cell = cells.get(label_col).ok_or_else(|| {
            CliError::Invalid(format!("truth line {line}: missing column {label_col}"))
        })?;
        let label: Label = cell
            .parse()
            .map_err(|e| CliError::Invalid(format!("truth line {line}: {e}")))?;
        let index = match index_col {
            Some(c) => cells
                .get(c)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Invalid(format!("truth line {line}: bad frame index")))?,
            None => rows.len(),
        };
        rows.push((index, label.is_wave()));
    }
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, b)| b).collect())
}

fn evaluate_files(pred: &Path, truth: &Path, out: &Path) -> Result<(), CliError> {
    let pred_text = fs::read_to_string(pred).map_err(CliError::io(pred.display().to_string()))?;
    let mut rows = parse_scores_csv(&pred_text)?;
    rows.sort_by_key(|r| r.frame_index);
    let preds: Vec<LabeledPrediction> = rows
        .iter()
        .map(|r| {
            let mut p = LabeledPrediction::from_score(r.frame_index, r.score, 0.5);
            if let Some(label) = r.label {
                p.label = label;
            }
            p
        })
        .collect();
    let truth_text =
        fs::read_to_string(truth).map_err(CliError::io(truth.display().to_string()))?;
    let truth = parse_truth_csv(&truth_text)?;
    let m = evaluate(&preds, &truth)?;
    let json = serde_json::json!({
        "accuracy": m.accuracy,
        "f1": m.f1,
        "auc": m.auc,
        "tp": m.tp,
        "fp": m.fp,
        "tn": m.tn,
        "fn": m.fn_,
    });
    write_text(out, &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()))
}

#[allow(clippy::too_many_arguments)]
fn detect_period(
    input: &Path,
    fps: Option<f64>,
    mask: MaskArgs,
    (interval_min, interval_max, interval_step): (f64, f64, f64),
    (tl, tr): (f64, f64),
    phase_average: bool,
    out: &Path,
    summary: &Path,
) -> Result<(), CliError> {
    let seq = load_sequence(input, fps)?;
    let mask = build_mask(mask)?;
    let grid = IntervalGrid::new(interval_min, interval_max, interval_step, seq.fps())?;
    let curve = if phase_average {
        interval_curve_phase_averaged(&seq, &grid, &mask)?
    } else {
        interval_curve(&seq, &grid, &mask)?
    };

    let mut csv = String::from("interval_s,mean_score,pair_count\n");
    for p in curve.points() {
        csv.push_str(&format!(
            "{},{},{}\n",
            p.interval_s, p.mean_score, p.pair_count
        ));
    }
    write_text(out, &csv)?;

    let (period_s, status, result) = match find_period(&curve, tl, tr) {
        Ok(est) => (Some(est.period_s), "ok", Ok(())),
        Err(e @ PeriodicityError::NoPeriodicity { .. }) => {
            (None, "no_periodicity", Err(CliError::from(e)))
        }
        Err(e @ PeriodicityError::EmptyRange { .. }) => {
            (None, "empty_range", Err(CliError::from(e)))
        }
        Err(e) => return Err(e.into()),
    };
    let json = serde_json::json!({
        "period_s": period_s,
        "t_l": tl,
        "t_r": tr,
        "status": status,
    });
    write_text(summary, &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()))?;
    if let Some(p) = period_s {
        println!("{p}");
    }
    result
}

fn error_summary_file(input: &Path, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(input).map_err(CliError::io(input.display().to_string()))?;
    let mut values = Vec::new();
    for (line_idx, raw) in text.lines().enumerate() {
        let cell = raw.split(',').next().unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) => values.push(v),
            // a non-numeric first row is a header
            Err(_) if line_idx == 0 => continue,
            Err(e) => {
                return Err(CliError::Invalid(format!(
                    "line {}: {e} in {cell:?}",
                    line_idx + 1
                )))
            }
        }
    }
    let s = error_summary(&values)?;
    write_text(
        out,
        &format!("{}\n", serde_json::to_string_pretty(&serde_json::json!(s)).unwrap()),
    )
}

#[allow(clippy::too_many_arguments)]
fn synth(
    mode: SynthModeArg,
    period: f64,
    duration: f64,
    fps: f64,
    size: u32,
    amplitude: f64,
    (jitter_p, jitter_max): (f64, u32),
    noise_sigma: f64,
    (mucus_blobs, mucus_radius, mucus_drift): (usize, f64, f64),
    seed: u64,
    out_dir: &Path,
    truth_path: &PathBuf,
) -> Result<(), CliError> {
    let spec = SynthSpec {
        mode: match mode {
            SynthModeArg::Sinusoid => SynthMode::Sinusoid,
            SynthModeArg::Ring => SynthMode::TravelingRing,
        },
        width: size,
        height: size,
        fps,
        duration_s: duration,
        period_s: period,
        amplitude,
        jitter: (jitter_p > 0.0).then_some(JitterSpec {
            probability: jitter_p,
            max_shift: jitter_max,
        }),
        noise_sigma,
        mucus: (mucus_blobs > 0).then_some(MucusSpec {
            blob_count: mucus_blobs,
            blob_radius: mucus_radius,
            drift: mucus_drift,
        }),
        seed,
    };
    let (seq, truth) = generate(&spec)?;
    save_sequence(&seq, out_dir)?;
    let mut csv = String::from("frame_index,wave_active,jittered\n");
    for t in &truth {
        csv.push_str(&format!(
            "{},{},{}\n",
            t.frame_index, t.wave_active, t.jittered
        ));
    }
    write_text(truth_path, &csv)?;
    println!("{} frames written to {}", seq.len(), out_dir.display());
    Ok(())
}
