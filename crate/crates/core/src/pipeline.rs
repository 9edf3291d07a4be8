//! Sliding-window wave classification, stability gating, and evaluation.
//!
//! Scoring is pluggable behind [`WaveScorer`] so a trained model can slot in
//! later; two reference scorers ship here. Predictions at frames the motion
//! detector calls unstable are replaced by the nearest earlier stable
//! frame's prediction, mirroring how unreliable frames are handled at
//! inference time.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::frame::{Frame, FrameSequence};
use crate::motion::MotionScore;

/// Score at or above which a frame is labeled Wave.
pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("window of {window} frames does not fit a {frames}-frame sequence")]
    WindowTooLong { window: usize, frames: usize },
    #[error("invalid window config: {0}")]
    InvalidWindow(String),
    #[error("scorer needs a window of at least 2 frames, got {0}")]
    WindowTooShort(usize),
    #[error("{preds} predictions do not cover {scores} pair verdicts (+1 frame)")]
    GateLengthMismatch { preds: usize, scores: usize },
    #[error("{preds} predictions vs {truth} truth labels")]
    EvalLengthMismatch { preds: usize, truth: usize },
    #[error("evaluation needs at least one prediction")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no replay score for frame {frame}")]
    MissingScore { frame: usize },
    #[error("replay file holds {file} scores but the sequence has {frames} frames")]
    FrameCountMismatch { file: usize, frames: usize },
}

/// Binary wave label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Wave,
    Nowave,
}

impl Label {
    pub fn from_score(score: f64, threshold: f64) -> Self {
        if score >= threshold {
            Label::Wave
        } else {
            Label::Nowave
        }
    }

    pub fn is_wave(self) -> bool {
        self == Label::Wave
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Wave => "Wave",
            Label::Nowave => "Nowave",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Wave" | "wave" | "1" | "true" => Ok(Label::Wave),
            "Nowave" | "nowave" | "0" | "false" => Ok(Label::Nowave),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// How windows tile the sequence and which frame gets each window's score.
#[derive(Debug, Clone, Copy)]
pub struct WindowConfig {
    pub length: usize,
    pub stride: usize,
    /// Offset within the window that receives the label.
    pub anchor: usize,
}

impl WindowConfig {
    /// Causal labeling: stride 1, score attached to the window's last frame.
    pub fn new(length: usize) -> Result<Self, PipelineError> {
        Self::with_anchor(length, 1, length.saturating_sub(1))
    }

    pub fn with_anchor(length: usize, stride: usize, anchor: usize) -> Result<Self, PipelineError> {
        if length < 1 || stride < 1 || anchor >= length {
            return Err(PipelineError::InvalidWindow(format!(
                "length={length} stride={stride} anchor={anchor}"
            )));
        }
        Ok(Self {
            length,
            stride,
            anchor,
        })
    }
}

/// One frame's wave prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPrediction {
    pub frame_index: usize,
    pub score: f64,
    pub label: Label,
    /// True when the value was carried forward from an earlier stable frame.
    pub gated: bool,
}

impl LabeledPrediction {
    pub fn from_score(frame_index: usize, score: f64, threshold: f64) -> Self {
        Self {
            frame_index,
            score,
            label: Label::from_score(score, threshold),
            gated: false,
        }
    }
}

/// Anything that can score a window of frames with a wave probability.
///
/// `anchor` is the in-window offset of the frame the score will label;
/// scorers that only look at pixels ignore it.
pub trait WaveScorer {
    fn score_window(&self, window: &[Frame], anchor: usize) -> Result<f64, PipelineError>;
}

/// Scores every window and spreads scores to all frames.
///
/// Each window's score lands on its anchor frame; every other frame takes
/// the nearest anchored score at or before it, and frames before the first
/// anchor inherit the first score. Labels use the 0.5 decision threshold.
pub fn classify_sequence(
    seq: &FrameSequence,
    cfg: &WindowConfig,
    scorer: &dyn WaveScorer,
) -> Result<Vec<LabeledPrediction>, PipelineError> {
    classify_sequence_with_threshold(seq, cfg, scorer, DEFAULT_DECISION_THRESHOLD)
}

pub fn classify_sequence_with_threshold(
    seq: &FrameSequence,
    cfg: &WindowConfig,
    scorer: &dyn WaveScorer,
    decision_threshold: f64,
) -> Result<Vec<LabeledPrediction>, PipelineError> {
    let n = seq.len();
    if n < cfg.length {
        return Err(PipelineError::WindowTooLong {
            window: cfg.length,
            frames: n,
        });
    }
    let frames = seq.frames();
    let mut anchored: Vec<(usize, f64)> = Vec::new();
    let mut start = 0usize;
    while start + cfg.length <= n {
        let window = &frames[start..start + cfg.length];
        let score = scorer.score_window(window, cfg.anchor)?;
        anchored.push((start + cfg.anchor, score));
        start += cfg.stride;
    }

    let mut preds = Vec::with_capacity(n);
    let mut cursor = 0usize;
    for frame_index in 0..n {
        while cursor + 1 < anchored.len() && anchored[cursor + 1].0 <= frame_index {
            cursor += 1;
        }
        // before the first anchor, fall back to the first available score
        let (_, score) = anchored[cursor.min(anchored.len() - 1)];
        let effective = if anchored[0].0 > frame_index {
            anchored[0].1
        } else {
            score
        };
        preds.push(LabeledPrediction::from_score(
            frame_index,
            effective,
            decision_threshold,
        ));
    }
    Ok(preds)
}

/// Replaces predictions at unstable frames with the nearest earlier stable
/// frame's prediction.
///
/// `scores[k]` is the verdict for frame k + 1; frame 0 is stable by
/// definition and is never gated. Replaced entries keep their own frame
/// index and set the `gated` flag.
pub fn gate_predictions(
    preds: &[LabeledPrediction],
    scores: &[MotionScore],
) -> Result<Vec<LabeledPrediction>, PipelineError> {
    if preds.len() != scores.len() + 1 {
        return Err(PipelineError::GateLengthMismatch {
            preds: preds.len(),
            scores: scores.len(),
        });
    }
    let mut out = Vec::with_capacity(preds.len());
    let mut carried = match preds.first() {
        Some(first) => (first.score, first.label),
        None => return Ok(out),
    };
    for (k, pred) in preds.iter().enumerate() {
        let stable = k == 0 || scores[k - 1].if_stable;
        if stable {
            carried = (pred.score, pred.label);
            out.push(*pred);
        } else {
            out.push(LabeledPrediction {
                frame_index: pred.frame_index,
                score: carried.0,
                label: carried.1,
                gated: true,
            });
        }
    }
    Ok(out)
}

/// Confusion counts plus the derived detection metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMetrics {
    pub accuracy: f64,
    pub f1: f64,
    /// None when the truth is single-class and ranking quality is undefined.
    pub auc: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Accuracy and F1 from the labels, AUC from the scores by pair counting.
///
/// Tied positive/negative score pairs count half. An all-positive or
/// all-negative truth leaves AUC undefined but still yields accuracy and F1
/// (F1 is 0 when no positive appears anywhere).
pub fn evaluate(
    preds: &[LabeledPrediction],
    truth: &[bool],
) -> Result<DetectionMetrics, PipelineError> {
    if preds.len() != truth.len() {
        return Err(PipelineError::EvalLengthMismatch {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    if preds.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (pred, &actual) in preds.iter().zip(truth) {
        match (pred.label.is_wave(), actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let total = (tp + fp + tn + fn_) as f64;
    let accuracy = (tp + tn) as f64 / total;
    let f1_den = 2 * tp + fp + fn_;
    let f1 = if f1_den == 0 {
        0.0
    } else {
        2.0 * tp as f64 / f1_den as f64
    };
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let auc = roc_auc_pair_counting(&scores, truth);
    Ok(DetectionMetrics {
        accuracy,
        f1,
        auc,
        tp,
        fp,
        tn,
        fn_,
    })
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly,
/// ties counting one half. None for single-class truth.
pub fn roc_auc_pair_counting(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let positives: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t)
        .map(|(&s, _)| s)
        .collect();
    let negatives: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| !t)
        .map(|(&s, _)| s)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let mut won = 0.0f64;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                won += 1.0;
            } else if p == n {
                won += 0.5;
            }
        }
    }
    Some(won / (positives.len() as f64 * negatives.len() as f64))
}

/// AUC by trapezoidal integration of the ROC curve; the independent route
/// used to cross-check [`roc_auc_pair_counting`].
pub fn roc_auc_trapezoidal(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let pos_total = truth.iter().filter(|&&t| t).count() as f64;
    let neg_total = truth.len() as f64 - pos_total;
    if pos_total == 0.0 || neg_total == 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut auc = 0.0;
    let (mut tp, mut fp) = (0.0f64, 0.0f64);
    let (mut prev_tp, mut prev_fp) = (0.0f64, 0.0f64);
    let mut prev_score = f64::INFINITY;
    for &i in &order {
        if scores[i] != prev_score {
            auc += (fp - prev_fp) * (tp + prev_tp) / 2.0;
            prev_tp = tp;
            prev_fp = fp;
            prev_score = scores[i];
        }
        if truth[i] {
            tp += 1.0;
        } else {
            fp += 1.0;
        }
    }
    auc += (fp - prev_fp) * (tp + prev_tp) / 2.0;
    Some(auc / (pos_total * neg_total))
}

/// Reference scorer built on radial structure.
///
/// Each frame is collapsed to mean intensities over concentric annuli; the
/// radial position of the darkest annulus (parabolically refined) forms a
/// per-frame depth signal, and the score squashes that signal's standard
/// deviation across the window into [0, 1). A contraction front sweeping
/// through the window moves the darkest annulus and scores high; static
/// scenes and spatially flat flicker stay near 0.
#[derive(Debug, Clone)]
pub struct HeuristicScorer {
    annuli: usize,
    squash_scale: f64,
}

impl HeuristicScorer {
    pub fn new() -> Self {
        Self {
            annuli: 24,
            squash_scale: 0.01,
        }
    }
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        Self::new()
    }
}

impl WaveScorer for HeuristicScorer {
    fn score_window(&self, window: &[Frame], _anchor: usize) -> Result<f64, PipelineError> {
        if window.len() < 2 {
            return Err(PipelineError::WindowTooShort(window.len()));
        }
        let depths: Vec<f64> = window
            .iter()
            .map(|f| darkest_annulus_depth(f, self.annuli))
            .collect();
        let mean = depths.iter().sum::<f64>() / depths.len() as f64;
        let var = depths.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
            / depths.len() as f64;
        let std = var.sqrt();
        Ok(std / (std + self.squash_scale))
    }
}

/// Normalized radial position of the darkest annulus in [0, 1].
fn darkest_annulus_depth(frame: &Frame, annuli: usize) -> f64 {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let radius = (w.min(h) as f64) / 2.0;
    let bin_width = radius / annuli as f64;
    let mut sums = vec![0.0f64; annuli];
    let mut counts = vec![0u64; annuli];
    let pixels = frame.intensities();
    for y in 0..h {
        let dy = y as f64 - cy;
        for x in 0..w {
            let dx = x as f64 - cx;
            let bin = (((dx * dx + dy * dy).sqrt() / bin_width) as usize).min(annuli - 1);
            sums[bin] += pixels[y * w + x] as f64;
            counts[bin] += 1;
        }
    }
    // compact away empty annuli (only possible on very small frames)
    let mut idx = Vec::with_capacity(annuli);
    let mut profile = Vec::with_capacity(annuli);
    for k in 0..annuli {
        if counts[k] > 0 {
            idx.push(k as f64);
            profile.push(sums[k] / counts[k] as f64);
        }
    }
    let mut j = 0usize;
    for (k, &v) in profile.iter().enumerate() {
        if v < profile[j] {
            j = k;
        }
    }
    let mut refined = idx[j];
    if j > 0 && j + 1 < profile.len() {
        let (a, b, c) = (profile[j - 1], profile[j], profile[j + 1]);
        let den = a - 2.0 * b + c;
        if den > 1e-12 {
            refined += 0.5 * (a - c) / den;
        }
    }
    refined / (annuli as f64 - 1.0)
}

/// Scorer that replays a per-frame score file.
///
/// The score of the window's anchor frame is returned verbatim, so running
/// [`classify_sequence`] with this scorer reproduces the file at every
/// anchored frame.
#[derive(Debug, Clone)]
pub struct ReplayScorer {
    scores: HashMap<usize, f64>,
}

impl ReplayScorer {
    /// Parses `frame_index,score[,label]` CSV contents (header required).
    pub fn from_csv(contents: &str) -> Result<Self, PipelineError> {
        let rows = parse_scores_csv(contents)?;
        Ok(Self {
            scores: rows.into_iter().map(|r| (r.frame_index, r.score)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Errors unless the file covers exactly the sequence's frame count.
    pub fn check_frame_count(&self, frames: usize) -> Result<(), PipelineError> {
        if self.scores.len() != frames {
            return Err(PipelineError::FrameCountMismatch {
                file: self.scores.len(),
                frames,
            });
        }
        Ok(())
    }
}

impl WaveScorer for ReplayScorer {
    fn score_window(&self, window: &[Frame], anchor: usize) -> Result<f64, PipelineError> {
        let frame = window[anchor].index();
        self.scores
            .get(&frame)
            .copied()
            .ok_or(PipelineError::MissingScore { frame })
    }
}

/// One parsed row of a scores file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub frame_index: usize,
    pub score: f64,
    pub label: Option<Label>,
}

/// Parses the `frame_index,score[,label]` format; errors carry 1-based line
/// numbers.
pub fn parse_scores_csv(contents: &str) -> Result<Vec<ScoreRow>, PipelineError> {
    let mut rows = Vec::new();
    let mut lines = contents.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((line, text)) if text.trim().is_empty() => {
                let _ = line;
            }
            Some((_, text)) => break text,
            None => {
                return Err(PipelineError::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
    };
    let header_fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if header_fields.len() < 2
        || header_fields[0] != "frame_index"
        || header_fields[1] != "score"
    {
        return Err(PipelineError::Parse {
            line: 1,
            message: format!("expected header frame_index,score[,label], got {header:?}"),
        });
    }
    for (line_idx, text) in lines {
        let line = line_idx + 1;
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(PipelineError::Parse {
                line,
                message: format!("expected 2 or 3 fields, got {}", fields.len()),
            });
        }
        let frame_index = fields[0].parse().map_err(|_| PipelineError::Parse {
            line,
            message: format!("bad frame index {:?}", fields[0]),
        })?;
        let score: f64 = fields[1].parse().map_err(|_| PipelineError::Parse {
            line,
            message: format!("bad score {:?}", fields[1]),
        })?;
        if !(0.0..=1.0).contains(&score) {
            return Err(PipelineError::Parse {
                line,
                message: format!("score {score} outside [0, 1]"),
            });
        }
        let label = match fields.get(2) {
            Some(f) => Some(f.parse().map_err(|e| PipelineError::Parse {
                line,
                message: e,
            })?),
            None => None,
        };
        rows.push(ScoreRow {
            frame_index,
            score,
            label,
        });
    }
    Ok(rows)
}
