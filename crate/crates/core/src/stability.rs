//! Stable-run extraction and threshold sweeps.
//!
//! A run is a maximal block of frames whose connecting verdicts are all
//! stable. An unstable verdict condemns the transition, not the frame, so
//! the frame after it starts the next run. Runs over the whole sequence
//! therefore partition every frame.

use thiserror::Error;

use crate::frame::FrameSequence;
use crate::motion::{cmd_score, GaussianMask, MotionError, MotionScore};

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("min_length must be at least 1, got {0}")]
    InvalidMinLength(usize),
    #[error("thresholds must be non-empty, non-negative, and strictly ascending")]
    InvalidThresholds,
    #[error("knee suggestion needs at least 3 sweep points, got {0}")]
    TooFewSweepPoints(usize),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

/// A maximal block of consecutive frames with no internal motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StableRun {
    pub start_index: usize,
    pub length: usize,
}

impl StableRun {
    /// One past the last frame of the run.
    pub fn end_index(&self) -> usize {
        self.start_index + self.length
    }
}

/// Mean maximal-run length induced by one candidate threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub mean_run_length: f64,
    pub run_count: usize,
}

/// Splits the frame index range into maximal stable runs.
///
/// `scores[k]` is the verdict for the transition between frames k and k+1,
/// so the input covers N = scores.len() + 1 frames; frame 0 always opens a
/// run. Runs shorter than `min_length` are discarded. Empty input yields
/// empty output.
pub fn extract_stable_runs(
    scores: &[MotionScore],
    min_length: usize,
) -> Result<Vec<StableRun>, StabilityError> {
    if min_length < 1 {
        return Err(StabilityError::InvalidMinLength(min_length));
    }
    let flags: Vec<bool> = scores.iter().map(|s| s.if_stable).collect();
    Ok(runs_from_flags(&flags)
        .into_iter()
        .filter(|r| r.length >= min_length)
        .collect())
}

/// Run decomposition from per-transition stability flags.
fn runs_from_flags(stable: &[bool]) -> Vec<StableRun> {
    if stable.is_empty() {
        return Vec::new();
    }
    let mut runs = Vec::new();
    let mut start = 0usize;
    for (k, &ok) in stable.iter().enumerate() {
        if !ok {
            runs.push(StableRun {
                start_index: start,
                length: k + 1 - start,
            });
            start = k + 1;
        }
    }
    runs.push(StableRun {
        start_index: start,
        length: stable.len() + 1 - start,
    });
    runs
}

/// Mean maximal-run length for each candidate threshold.
///
/// Raw pair scores are computed once and re-thresholded per point, so the
/// sweep costs one scoring pass regardless of how many thresholds it covers.
pub fn threshold_sweep(
    seq: &FrameSequence,
    mask: &GaussianMask,
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>, StabilityError> {
    validate_thresholds(thresholds)?;
    if seq.len() < 2 {
        return Err(MotionError::SequenceTooShort(seq.len()).into());
    }
    let raw: Vec<f64> = seq
        .frames()
        .windows(2)
        .map(|pair| cmd_score(&pair[0], &pair[1], mask))
        .collect::<Result<_, _>>()?;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let flags: Vec<bool> = raw.iter().map(|&s| s <= t).collect();
            let runs = runs_from_flags(&flags);
            let total: usize = runs.iter().map(|r| r.length).sum();
            SweepPoint {
                threshold: t,
                mean_run_length: total as f64 / runs.len() as f64,
                run_count: runs.len(),
            }
        })
        .collect())
}

fn validate_thresholds(thresholds: &[f64]) -> Result<(), StabilityError> {
    if thresholds.is_empty() {
        return Err(StabilityError::InvalidThresholds);
    }
    let ascending = thresholds.windows(2).all(|w| w[0] < w[1]);
    let in_range = thresholds.iter().all(|&t| t >= 0.0 && t.is_finite());
    if !ascending || !in_range {
        return Err(StabilityError::InvalidThresholds);
    }
    Ok(())
}

/// Picks the threshold after which mean run length stops growing quickly.
///
/// The increments between consecutive sweep points are compared against the
/// largest observed increment; the suggestion is the earliest threshold whose
/// remaining increments all fall within `fraction` of that maximum. Constant
/// curves suggest the first threshold, strictly linear growth the last.
/// Advisory only.
pub fn suggest_knee(sweep: &[SweepPoint], fraction: f64) -> Result<f64, StabilityError> {
    if sweep.len() < 3 {
        return Err(StabilityError::TooFewSweepPoints(sweep.len()));
    }
    let increments: Vec<f64> = sweep
        .windows(2)
        .map(|w| w[1].mean_run_length - w[0].mean_run_length)
        .collect();
    let max_increment = increments.iter().cloned().fold(f64::MIN, f64::max);
    let cutoff = fraction * max_increment;
    // increments[j] is the step entering sweep[j + 1]
    for k in 0..sweep.len() {
        if increments.iter().skip(k).all(|&d| d <= cutoff) {
            return Ok(sweep[k].threshold);
        }
    }
    Ok(sweep[sweep.len() - 1].threshold)
}

/// Default fraction for [`suggest_knee`].
pub const DEFAULT_KNEE_FRACTION: f64 = 0.25;
