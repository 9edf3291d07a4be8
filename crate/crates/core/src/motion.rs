//! Camera motion detection over frame pairs.
//!
//! A pair of consecutive frames is reduced to the histogram of its absolute
//! residual image, the histogram is weighted by a discrete Gaussian mask
//! centered mid-range, and the weighted sum is thresholded: large mass at
//! mid-to-high residual values means the whole view moved, small mass means
//! the camera held still. Stable pairs concentrate the histogram at bin 0,
//! which carries almost no weight.

use thiserror::Error;

use crate::frame::{Frame, FrameSequence};

/// Default mask center bin.
pub const DEFAULT_MU: f64 = 128.0;
/// Default mask standard deviation in bins.
pub const DEFAULT_SIGMA: f64 = 20.0;
/// Default stability threshold, calibrated for 480x480 frames.
pub const DEFAULT_THRESHOLD: f64 = 200.0;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("frames are {a_w}x{a_h} vs {b_w}x{b_h}; residual needs equal dimensions")]
    DimensionMismatch {
        a_w: u32,
        a_h: u32,
        b_w: u32,
        b_h: u32,
    },
    #[error("mask sigma must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("scoring needs at least 2 frames, got {0}")]
    SequenceTooShort(usize),
}

/// Unit-sum Gaussian weights over the 256 residual bins.
#[derive(Debug, Clone)]
pub struct GaussianMask {
    mu: f64,
    sigma: f64,
    weights: [f64; 256],
}

impl GaussianMask {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, MotionError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(MotionError::InvalidSigma(sigma));
        }
        let mut weights = [0.0f64; 256];
        let mut sum = 0.0;
        for (bin, w) in weights.iter_mut().enumerate() {
            let d = bin as f64 - mu;
            *w = (-d * d / (2.0 * sigma * sigma)).exp();
            sum += *w;
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Ok(Self { mu, sigma, weights })
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn weights(&self) -> &[f64; 256] {
        &self.weights
    }

    #[inline]
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }
}

impl Default for GaussianMask {
    fn default() -> Self {
        Self::new(DEFAULT_MU, DEFAULT_SIGMA).expect("default mask parameters are valid")
    }
}

/// 256-bin histogram of an absolute residual image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualHistogram {
    bins: [u64; 256],
}

impl ResidualHistogram {
    #[inline]
    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Weighted residual score for a frame pair plus the stability verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionScore {
    pub score: f64,
    pub threshold: f64,
    pub if_stable: bool,
}

impl MotionScore {
    /// The verdict is derived, never stored independently: stable iff
    /// score <= threshold.
    pub fn new(score: f64, threshold: f64) -> Self {
        Self {
            score,
            threshold,
            if_stable: score <= threshold,
        }
    }
}

/// Histogram of per-pixel absolute differences |a - b|.
pub fn residual_histogram(a: &Frame, b: &Frame) -> Result<ResidualHistogram, MotionError> {
    check_dimensions(a, b)?;
    let mut bins = [0u64; 256];
    for (&pa, &pb) in a.intensities().iter().zip(b.intensities()) {
        bins[pa.abs_diff(pb) as usize] += 1;
    }
    Ok(ResidualHistogram { bins })
}

/// Residual histogram weighted by the mask and summed.
pub fn cmd_score(a: &Frame, b: &Frame, mask: &GaussianMask) -> Result<f64, MotionError> {
    let hist = residual_histogram(a, b)?;
    Ok(masked_sum(&hist, mask))
}

fn masked_sum(hist: &ResidualHistogram, mask: &GaussianMask) -> f64 {
    hist.bins
        .iter()
        .zip(mask.weights())
        .map(|(&count, &w)| count as f64 * w)
        .sum()
}

/// Scores a pair and classifies the newer frame as stable or not.
pub fn classify_stability(
    a: &Frame,
    b: &Frame,
    mask: &GaussianMask,
    threshold: f64,
) -> Result<MotionScore, MotionError> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(MotionError::InvalidThreshold(threshold));
    }
    Ok(MotionScore::new(cmd_score(a, b, mask)?, threshold))
}

/// Scores every consecutive pair; entry k covers frames (k, k+1) and
/// classifies frame k+1. Frame 0 has no entry: it is stable by definition.
pub fn score_sequence(
    seq: &FrameSequence,
    mask: &GaussianMask,
    threshold: f64,
) -> Result<Vec<MotionScore>, MotionError> {
    if seq.len() < 2 {
        return Err(MotionError::SequenceTooShort(seq.len()));
    }
    let frames = seq.frames();
    frames
        .windows(2)
        .map(|pair| classify_stability(&pair[0], &pair[1], mask, threshold))
        .collect()
}

fn check_dimensions(a: &Frame, b: &Frame) -> Result<(), MotionError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MotionError::DimensionMismatch {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    Ok(())
}
