//! Error wrapper that maps every failure onto an exit-1 machine-readable
//! JSON object on stderr: {"error": <code>, "message": <detail>}.

use std::fmt;

use gastrowave_core::frame::{FrameError, SequenceIoError};
use gastrowave_core::motion::MotionError;
use gastrowave_core::period::PeriodicityError;
use gastrowave_core::pipeline::PipelineError;
use gastrowave_core::stability::StabilityError;
use gastrowave_core::synth::SynthError;

#[derive(Debug)]
pub enum CliError {
    Sequence(SequenceIoError),
    Motion(MotionError),
    Stability(StabilityError),
    Pipeline(PipelineError),
    Periodicity(PeriodicityError),
    Synth(SynthError),
    Io { context: String, source: std::io::Error },
    Invalid(String),
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    /// Stable machine-readable code for the JSON error object.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Sequence(e) => match e {
                SequenceIoError::MissingDirectory(_) => "MissingDirectory",
                SequenceIoError::NoFrames(_) => "NoFrames",
                SequenceIoError::Decode { .. } => "UndecodableFrame",
                SequenceIoError::DimensionMismatch { .. } => "DimensionMismatch",
                SequenceIoError::Io { .. } => "Io",
                SequenceIoError::InvalidMeta(_) => "InvalidMeta",
                SequenceIoError::Frame(FrameError::DimensionMismatch { .. }) => {
                    "DimensionMismatch"
                }
                SequenceIoError::Frame(_) => "InvalidFrame",
            },
            CliError::Motion(e) => match e {
                MotionError::DimensionMismatch { .. } => "DimensionMismatch",
                MotionError::SequenceTooShort(_) => "SequenceTooShort",
                _ => "InvalidArgument",
            },
            CliError::Stability(e) => match e {
                StabilityError::TooFewSweepPoints(_) => "TooFewSweepPoints",
                StabilityError::Motion(MotionError::SequenceTooShort(_)) => "SequenceTooShort",
                StabilityError::Motion(_) => "DimensionMismatch",
                _ => "InvalidArgument",
            },
            CliError::Pipeline(e) => match e {
                PipelineError::WindowTooLong { .. } => "WindowTooLong",
                PipelineError::WindowTooShort(_) => "WindowTooShort",
                PipelineError::GateLengthMismatch { .. }
                | PipelineError::EvalLengthMismatch { .. } => "LengthMismatch",
                PipelineError::EmptyInput => "EmptyInput",
                PipelineError::Parse { .. } => "ParseError",
                PipelineError::MissingScore { .. } => "MissingScore",
                PipelineError::FrameCountMismatch { .. } => "FrameCountMismatch",
                PipelineError::InvalidWindow(_) => "InvalidArgument",
            },
            CliError::Periodicity(e) => match e {
                PeriodicityError::NoPeriodicity { .. } => "NoPeriodicity",
                PeriodicityError::EmptyRange { .. } => "EmptyRange",
                PeriodicityError::EmptyCurve => "EmptyCurve",
                PeriodicityError::Motion(MotionError::SequenceTooShort(_)) => "SequenceTooShort",
                PeriodicityError::Motion(_) => "DimensionMismatch",
                _ => "InvalidArgument",
            },
            CliError::Synth(_) => "InvalidSpec",
            CliError::Io { .. } => "Io",
            CliError::Invalid(_) => "InvalidArgument",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Sequence(e) => e.fmt(f),
            CliError::Motion(e) => e.fmt(f),
            CliError::Stability(e) => e.fmt(f),
            CliError::Pipeline(e) => e.fmt(f),
            CliError::Periodicity(e) => e.fmt(f),
            CliError::Synth(e) => e.fmt(f),
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SequenceIoError> for CliError {
    fn from(e: SequenceIoError) -> Self {
        CliError::Sequence(e)
    }
}

impl From<MotionError> for CliError {
    fn from(e: MotionError) -> Self {
        CliError::Motion(e)
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        CliError::Stability(e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl From<PeriodicityError> for CliError {
    fn from(e: PeriodicityError) -> Self {
        CliError::Periodicity(e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Synth(e)
    }
}
