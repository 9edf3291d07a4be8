//! One binary, one subcommand per pipeline stage. Every stage reads frame
//! directories or CSV artifacts and writes CSV/JSON artifacts, so stages
//! chain through the filesystem.
//!
//! Exit codes: 0 on success, 1 on domain errors (with a JSON object on
//! stderr), 2 on usage errors.

mod error;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "gastrowave",
    version,
    about = "Camera-stability filtering, contraction-wave detection, and wave-period measurement for capsule-endoscopy frame sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Detector parameters shared by every stage that scores frame pairs.
#[derive(Args, Clone, Copy)]
struct MaskArgs {
    /// Center bin of the residual-histogram mask
    #[arg(long, default_value_t = 128.0)]
    mu: f64,
    /// Standard deviation of the mask in bins
    #[arg(long, default_value_t = 20.0)]
    sigma: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierKind {
    /// Radial-structure reference scorer
    Heuristic,
    /// Replay scores from a CSV file
    Replay,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorKind {
    /// Label the last frame of each window
    Last,
    /// Label the middle frame of each window
    Center,
    /// Label the first frame of each window
    First,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthModeArg {
    /// Per-pixel phase sinusoid over a textured base
    Sinusoid,
    /// Dark annulus sweeping inward over a textured base
    Ring,
}

#[derive(Subcommand)]
enum Command {
    /// Score consecutive frame pairs and classify camera stability
    CmdScore {
        /// Directory of frame_NNNNNN.pgm files
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mask: MaskArgs,
        /// Stability threshold on the pair score
        #[arg(long, default_value_t = 200.0)]
        threshold: f64,
        /// Frames per second; overrides the meta.json sidecar
        #[arg(long)]
        fps: Option<f64>,
        /// Output CSV (frame_index,score,if_stable)
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract maximal stable runs into per-run frame directories
    ExtractStable {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mask: MaskArgs,
        #[arg(long, default_value_t = 200.0)]
        threshold: f64,
        /// Keep only runs of at least this many frames
        #[arg(long, default_value_t = 5)]
        min_length: usize,
        #[arg(long)]
        fps: Option<f64>,
        /// Directory receiving one subdirectory per run
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Mean stable-run length across a range of thresholds
    SweepThreshold {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mask: MaskArgs,
        /// Threshold range start:stop:step, e.g. 0:10000:100
        #[arg(long)]
        thresholds: String,
        #[arg(long)]
        fps: Option<f64>,
        /// Output CSV (threshold,run_count,mean_run_length)
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify each frame as Wave or Nowave with a sliding window
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ClassifierKind::Heuristic)]
        classifier: ClassifierKind,
        /// Per-frame score file for the replay classifier
        #[arg(long)]
        replay_file: Option<PathBuf>,
        /// Window length in frames
        #[arg(long, default_value_t = 20)]
        window: usize,
        /// Frames between window starts
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Which frame of the window receives the score
        #[arg(long, value_enum, default_value_t = AnchorKind::Last)]
        anchor: AnchorKind,
        /// Replace predictions at unstable frames with the nearest earlier
        /// stable frame's prediction
        #[arg(long)]
        gate: bool,
        #[command(flatten)]
        mask: MaskArgs,
        /// Stability threshold used by --gate
        #[arg(long, default_value_t = 200.0)]
        threshold: f64,
        #[arg(long)]
        fps: Option<f64>,
        /// Output CSV (frame_index,score,label)
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare predictions against truth labels
    Evaluate {
        /// Predictions CSV (frame_index,score[,label])
        #[arg(long)]
        pred: PathBuf,
        /// Truth CSV (frame_index,label or a synth truth file)
        #[arg(long)]
        truth: PathBuf,
        /// Output JSON with accuracy, f1, auc, tp, fp, tn, fn
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the contraction-wave period from the interval-score curve
    DetectPeriod {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        fps: Option<f64>,
        #[command(flatten)]
        mask: MaskArgs,
        /// Smallest candidate interval in seconds
        #[arg(long, default_value_t = 5.0)]
        interval_min: f64,
        /// Largest candidate interval in seconds
        #[arg(long, default_value_t = 50.0)]
        interval_max: f64,
        /// Grid step in seconds
        #[arg(long, default_value_t = 0.5)]
        interval_step: f64,
        /// Lower bound of the searched period band in seconds
        #[arg(long, default_value_t = 10.0)]
        tl: f64,
        /// Upper bound of the searched period band in seconds
        #[arg(long, default_value_t = 40.0)]
        tr: f64,
        /// Average over every start offset instead of anchoring at frame 0
        #[arg(long)]
        phase_average: bool,
        /// Output CSV (interval_s,mean_score,pair_count)
        #[arg(long)]
        out: PathBuf,
        /// Output JSON with period_s, t_l, t_r, status
        #[arg(long)]
        summary: PathBuf,
    },
    /// Percentage gap between a detected and a counted period
    PeriodError {
        #[arg(long)]
        detected: f64,
        #[arg(long)]
        counted: f64,
    },
    /// Summary statistics over a file of period errors
    ErrorSummary {
        /// Input CSV/list of error percentages, one per line
        #[arg(long = "in")]
        input: PathBuf,
        /// Output JSON with mean, std, median, max, min
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic frame sequence with ground truth
    Synth {
        #[arg(long, value_enum, default_value_t = SynthModeArg::Sinusoid)]
        mode: SynthModeArg,
        /// Wave period in seconds
        #[arg(long, default_value_t = 20.0)]
        period: f64,
        /// Record length in seconds
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        #[arg(long, default_value_t = 2.0)]
        fps: f64,
        /// Square frame edge in pixels
        #[arg(long, default_value_t = 480)]
        size: u32,
        /// Wave amplitude in intensity units (0-127)
        #[arg(long, default_value_t = 100.0)]
        amplitude: f64,
        /// Per-frame probability of a camera-jitter event
        #[arg(long = "jitter-p", default_value_t = 0.0)]
        jitter_p: f64,
        /// Maximum jitter shift in pixels
        #[arg(long, default_value_t = 8)]
        jitter_max: u32,
        /// Gaussian sensor-noise sigma in intensity units
        #[arg(long = "noise", default_value_t = 0.0)]
        noise_sigma: f64,
        /// Number of drifting mucus blobs
        #[arg(long, default_value_t = 0)]
        mucus_blobs: usize,
        /// Mucus blob radius in pixels
        #[arg(long, default_value_t = 12.0)]
        mucus_radius: f64,
        /// Mucus drift in pixels per frame
        #[arg(long, default_value_t = 1.5)]
        mucus_drift: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Directory receiving the frame files
        #[arg(long)]
        out_dir: PathBuf,
        /// Ground-truth CSV (frame_index,wave_active,jittered)
        #[arg(long)]
        truth: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ops::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::FAILURE
        }
    }
}
