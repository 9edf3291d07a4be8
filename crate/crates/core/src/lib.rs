//! Detection and period measurement of gastric contraction waves in
//! capsule-endoscopy frame sequences.
//!
//! The library is organized around a small pipeline:
//!
//! - [`frame`]: frame/sequence types and PGM directory I/O;
//! - [`motion`]: the camera motion detector scoring frame pairs;
//! - [`stability`]: stable-run extraction and threshold sweeps;
//! - [`pipeline`]: windowed Wave/Nowave classification, stability gating,
//!   and detection metrics;
//! - [`period`]: the interval-scan period detector and its error metrics;
//! - [`synth`]: deterministic synthetic sequences with ground truth, used
//!   as the test oracle for everything above;
//! - [`rng`]: the pinned pseudo-random generator behind [`synth`].

pub mod frame;
pub mod motion;
pub mod period;
pub mod pgm;
pub mod pipeline;
pub mod rng;
pub mod stability;
pub mod synth;

pub use frame::{load_sequence, save_sequence, Frame, FrameSequence, SequenceMeta};
pub use motion::{
    classify_stability, cmd_score, residual_histogram, score_sequence, GaussianMask, MotionScore,
    ResidualHistogram,
};
pub use period::{
    error_summary, find_period, interval_curve, interval_curve_phase_averaged, period_error,
    CurvePoint, ErrorSummary, IntervalGrid, IntervalScoreCurve, PeriodEstimate,
};
pub use pipeline::{
    classify_sequence, evaluate, gate_predictions, DetectionMetrics, HeuristicScorer, Label,
    LabeledPrediction, ReplayScorer, WaveScorer, WindowConfig,
};
pub use stability::{extract_stable_runs, suggest_knee, threshold_sweep, StableRun, SweepPoint};
pub use synth::{generate, FrameTruth, JitterSpec, MucusSpec, SynthMode, SynthSpec};
