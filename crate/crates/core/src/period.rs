//! Contraction-wave period measurement.
//!
//! For every candidate interval the sequence is sampled at that spacing and
//! the pair scores are averaged; a genuinely periodic wave makes frames one
//! period apart nearly identical, so the mean score dips at the true period.
//! The detected period is the best-scoring strict local minimum of that
//! curve inside the physiologically plausible band.

use serde::Serialize;
use thiserror::Error;

use crate::frame::FrameSequence;
use crate::motion::{cmd_score, GaussianMask, MotionError};

/// Default search grid: 5 s to 50 s in 0.5 s steps.
pub const DEFAULT_MIN_INTERVAL_S: f64 = 5.0;
pub const DEFAULT_MAX_INTERVAL_S: f64 = 50.0;
pub const DEFAULT_STEP_S: f64 = 0.5;
/// Default plausible period band searched for the minimum.
pub const DEFAULT_T_LOWER_S: f64 = 10.0;
pub const DEFAULT_T_UPPER_S: f64 = 40.0;
/// Local minima whose mean scores differ by less than this factor are
/// treated as tied, and the tie goes to the smaller interval. Mean scores
/// at a true period and at its integer multiples are equal up to sampling
/// noise, so a strict comparison would pick between them arbitrarily.
pub const DEFAULT_TIE_RATIO: f64 = 2.0;

#[derive(Debug, Error)]
pub enum PeriodicityError {
    #[error("invalid interval grid: {0}")]
    InvalidGrid(String),
    #[error("sequence admits no pairs at any grid interval")]
    EmptyCurve,
    #[error("no curve points inside [{t_l}, {t_r}]")]
    EmptyRange { t_l: f64, t_r: f64 },
    #[error("no local minimum inside [{t_l}, {t_r}]")]
    NoPeriodicity { t_l: f64, t_r: f64 },
    #[error("search bounds must satisfy t_l < t_r, got [{t_l}, {t_r}]")]
    InvalidRange { t_l: f64, t_r: f64 },
    #[error("counted period must be positive, got {0}")]
    InvalidCounted(f64),
    #[error("error summary needs at least one value")]
    EmptyErrors,
    #[error(transparent)]
    Motion(#[from] MotionError),
}

/// Candidate-interval grid in seconds, tied to a frame rate.
#[derive(Debug, Clone, Copy)]
pub struct IntervalGrid {
    pub min_s: f64,
    pub max_s: f64,
    pub step_s: f64,
    pub fps: f64,
}

impl IntervalGrid {
    pub fn new(min_s: f64, max_s: f64, step_s: f64, fps: f64) -> Result<Self, PeriodicityError> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(PeriodicityError::InvalidGrid(format!(
                "fps must be positive, got {fps}"
            )));
        }
        if !(step_s > 0.0) || !(min_s > 0.0) || min_s >= max_s {
            return Err(PeriodicityError::InvalidGrid(format!(
                "need 0 < min < max and step > 0, got min={min_s} max={max_s} step={step_s}"
            )));
        }
        let grid = Self {
            min_s,
            max_s,
            step_s,
            fps,
        };
        for (interval_s, _) in grid.points_unchecked() {
            let frames = interval_s * fps;
            if (frames - frames.round()).abs() > 1e-6 {
                return Err(PeriodicityError::InvalidGrid(format!(
                    "interval {interval_s} s is {frames} frames at {fps} fps; grid points must be whole frames"
                )));
            }
        }
        Ok(grid)
    }

    /// Paper-default grid for a given frame rate.
    pub fn default_for(fps: f64) -> Result<Self, PeriodicityError> {
        Self::new(
            DEFAULT_MIN_INTERVAL_S,
            DEFAULT_MAX_INTERVAL_S,
            DEFAULT_STEP_S,
            fps,
        )
    }

    /// Grid points as (seconds, frame lag).
    pub fn points(&self) -> Vec<(f64, usize)> {
        self.points_unchecked()
    }

    fn points_unchecked(&self) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let interval_s = self.min_s + k as f64 * self.step_s;
            if interval_s > self.max_s + 1e-9 {
                break;
            }
            out.push((interval_s, (interval_s * self.fps).round() as usize));
            k += 1;
        }
        out
    }
}

/// One retained grid point of the interval-score curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub interval_s: f64,
    pub mean_score: f64,
    pub pair_count: usize,
}

/// Mean pair score per candidate interval, ascending in interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalScoreCurve {
    points: Vec<CurvePoint>,
}

impl IntervalScoreCurve {
    /// Wraps externally computed points; intended for fixtures and replay.
    pub fn from_points(points: Vec<CurvePoint>) -> Self {
        Self { points }
    }

    #[inline]
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Detected period with the evidence curve and the searched band.
#[derive(Debug, Clone)]
pub struct PeriodEstimate {
    pub period_s: f64,
    pub curve: IntervalScoreCurve,
    pub t_l: f64,
    pub t_r: f64,
}

/// Scores the sequence at every grid interval.
///
/// For interval lag L the scanned pairs are (0, L), (L, 2L), ... while the
/// later frame exists, so `pair_count == floor((N - 1) / L)`. Grid points
/// with no admissible pair are dropped; an entirely empty curve is an error.
pub fn interval_curve(
    seq: &FrameSequence,
    grid: &IntervalGrid,
    mask: &GaussianMask,
) -> Result<IntervalScoreCurve, PeriodicityError> {
    scan_curve(seq, grid, mask, false)
}

/// Like [`interval_curve`], but averages over every start offset instead of
/// anchoring the chain at frame 0: all pairs (k, k + L) contribute. Slower
/// and more robust; off by default in the pipeline.
pub fn interval_curve_phase_averaged(
    seq: &FrameSequence,
    grid: &IntervalGrid,
    mask: &GaussianMask,
) -> Result<IntervalScoreCurve, PeriodicityError> {
    scan_curve(seq, grid, mask, true)
}

fn scan_curve(
    seq: &FrameSequence,
    grid: &IntervalGrid,
    mask: &GaussianMask,
    phase_averaged: bool,
) -> Result<IntervalScoreCurve, PeriodicityError> {
    let frames = seq.frames();
    let n = frames.len();
    let mut points = Vec::new();
    for (interval_s, lag) in grid.points() {
        if lag == 0 || lag > n.saturating_sub(1) {
            continue;
        }
        let mut sum = 0.0;
        let mut count = 0usize;
        if phase_averaged {
            for k in 0..n - lag {
                sum += cmd_score(&frames[k], &frames[k + lag], mask)?;
                count += 1;
            }
        } else {
            let mut a = 0usize;
            while a + lag <= n - 1 {
                sum += cmd_score(&frames[a], &frames[a + lag], mask)?;
                a += lag;
                count += 1;
            }
        }
        if count > 0 {
            points.push(CurvePoint {
                interval_s,
                mean_score: sum / count as f64,
                pair_count: count,
            });
        }
    }
    if points.is_empty() {
        return Err(PeriodicityError::EmptyCurve);
    }
    Ok(IntervalScoreCurve { points })
}

/// Finds the period as the best local minimum of the curve in [t_l, t_r].
///
/// A point qualifies when its mean score is <= both curve neighbors and
/// strictly below at least one; neighbors just outside the band take part
/// in the test, so a monotone tail cannot qualify at the boundary. Among
/// qualifying minima the smallest score wins, with scores within
/// [`DEFAULT_TIE_RATIO`] of the best treated as tied and resolved toward
/// the smaller interval (integer multiples of the true period score as low
/// as the period itself).
pub fn find_period(
    curve: &IntervalScoreCurve,
    t_l: f64,
    t_r: f64,
) -> Result<PeriodEstimate, PeriodicityError> {
    find_period_with_tie_ratio(curve, t_l, t_r, DEFAULT_TIE_RATIO)
}

pub fn find_period_with_tie_ratio(
    curve: &IntervalScoreCurve,
    t_l: f64,
    t_r: f64,
    tie_ratio: f64,
) -> Result<PeriodEstimate, PeriodicityError> {
    if !(t_l < t_r) {
        return Err(PeriodicityError::InvalidRange { t_l, t_r });
    }
    let pts = curve.points();
    let in_range: Vec<usize> = (0..pts.len())
        .filter(|&j| pts[j].interval_s >= t_l && pts[j].interval_s <= t_r)
        .collect();
    if in_range.is_empty() {
        return Err(PeriodicityError::EmptyRange { t_l, t_r });
    }

    let mut candidates: Vec<&CurvePoint> = Vec::new();
    for &j in &in_range {
        let s = pts[j].mean_score;
        let mut le_all = true;
        let mut lt_any = false;
        for nj in [j.checked_sub(1), j.checked_add(1)] {
            if let Some(nj) = nj.filter(|&nj| nj < pts.len()) {
                let ns = pts[nj].mean_score;
                if ns < s {
                    le_all = false;
                }
                if ns > s {
                    lt_any = true;
                }
            }
        }
        if le_all && lt_any {
            candidates.push(&pts[j]);
        }
    }
    let best = candidates
        .iter()
        .min_by(|a, b| {
            (a.mean_score, a.interval_s)
                .partial_cmp(&(b.mean_score, b.interval_s))
                .expect("scores are finite")
        })
        .ok_or(PeriodicityError::NoPeriodicity { t_l, t_r })?;
    let chosen = candidates
        .iter()
        .filter(|c| c.mean_score <= tie_ratio * best.mean_score)
        .min_by(|a, b| {
            a.interval_s
                .partial_cmp(&b.interval_s)
                .expect("intervals are finite")
        })
        .unwrap_or(best);
    Ok(PeriodEstimate {
        period_s: chosen.interval_s,
        curve: curve.clone(),
        t_l,
        t_r,
    })
}

/// Relative gap between a detected and a manually counted period, in
/// percent: 100 * |detected - counted| / counted.
pub fn period_error(detected_s: f64, counted_s: f64) -> Result<f64, PeriodicityError> {
    if !(counted_s > 0.0) || !counted_s.is_finite() {
        return Err(PeriodicityError::InvalidCounted(counted_s));
    }
    Ok(100.0 * (detected_s - counted_s).abs() / counted_s)
}

/// Summary statistics over a set of period errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
}

/// Mean, population standard deviation, median, max, and min.
pub fn error_summary(errors: &[f64]) -> Result<ErrorSummary, PeriodicityError> {
    if errors.is_empty() {
        return Err(PeriodicityError::EmptyErrors);
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    Ok(ErrorSummary {
        mean,
        std: var.sqrt(),
        median,
        max: sorted[sorted.len() - 1],
        min: sorted[0],
    })
}
