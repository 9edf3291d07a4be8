//! Frame and sequence types plus directory-based sequence I/O.
//!
//! A sequence on disk is a directory of binary PGM files named
//! `frame_NNNNNN.pgm` (zero-padded so lexicographic order equals temporal
//! order), with an optional `meta.json` sidecar carrying fps and dimensions.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pgm;

/// Default capture rate of the target recorder.
pub const DEFAULT_FPS: f64 = 2.0;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("pixel buffer has {got} values, expected {expected} for {width}x{height}")]
    BufferSize {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
    #[error("fps must be positive, got {0}")]
    InvalidFps(f64),
    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        index: usize,
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("frame indices must be consecutive from 0; position {position} holds index {index}")]
    NonConsecutiveIndex { position: usize, index: usize },
}

#[derive(Debug, Error)]
pub enum SequenceIoError {
    #[error("sequence directory not found: {0}")]
    MissingDirectory(PathBuf),
    #[error("no frame files in {0}")]
    NoFrames(PathBuf),
    #[error("{file}: {source}")]
    Decode {
        file: String,
        source: pgm::PgmError,
    },
    #[error("{file}: frame is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        file: String,
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("{file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
    #[error("meta.json: {0}")]
    InvalidMeta(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// One grayscale video frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    index: usize,
    intensities: Vec<u8>,
}

impl Frame {
    /// Builds a frame, checking that the buffer matches the dimensions.
    pub fn new(
        width: u32,
        height: u32,
        index: usize,
        intensities: Vec<u8>,
    ) -> Result<Self, FrameError> {
        let expected = width as usize * height as usize;
        if intensities.len() != expected {
            return Err(FrameError::BufferSize {
                width,
                height,
                expected,
                got: intensities.len(),
            });
        }
        Ok(Self {
            width,
            height,
            index,
            intensities,
        })
    }

    /// Frame filled with a single intensity; handy in tests and fixtures.
    pub fn constant(width: u32, height: u32, index: usize, value: u8) -> Self {
        Self {
            width,
            height,
            index,
            intensities: vec![value; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.index
    }

    #[inline]
    pub fn intensities(&self) -> &[u8] {
        &self.intensities
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Intensity at (x, y); row-major storage.
    #[inline]
    pub fn at(&self, x: u32, y: u32) -> u8 {
        self.intensities[y as usize * self.width as usize + x as usize]
    }

    /// Same pixels under a new sequence position.
    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }
}

/// An ordered run of same-sized frames with a capture rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: f64,
}

impl FrameSequence {
    /// Validates indices (consecutive from 0), uniform dimensions, and fps.
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self, FrameError> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(FrameError::InvalidFps(fps));
        }
        if let Some(first) = frames.first() {
            let (w, h) = (first.width(), first.height());
            for (position, frame) in frames.iter().enumerate() {
                if frame.index() != position {
                    return Err(FrameError::NonConsecutiveIndex {
                        position,
                        index: frame.index(),
                    });
                }
                if frame.width() != w || frame.height() != h {
                    return Err(FrameError::DimensionMismatch {
                        index: position,
                        want_w: w,
                        want_h: h,
                        got_w: frame.width(),
                        got_h: frame.height(),
                    });
                }
            }
        }
        Ok(Self { frames, fps })
    }

    #[inline]
    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    #[inline]
    pub fn fps(&self) -> f64 {
        self.fps
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// (width, height) of the frames, or None for an empty sequence.
    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.frames.first().map(|f| (f.width(), f.height()))
    }

    /// Sub-sequence of `count` frames starting at `start`, reindexed from 0.
    pub fn slice(&self, start: usize, count: usize) -> Result<Self, FrameError> {
        let frames = self.frames[start..start + count]
            .iter()
            .enumerate()
            .map(|(k, f)| f.clone().with_index(k))
            .collect();
        Self::new(frames, self.fps)
    }
}

/// Optional `meta.json` sidecar stored next to the frame files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
}

fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.pgm")
}

/// Reads the `meta.json` sidecar if present.
pub fn read_meta(dir: &Path) -> Result<Option<SequenceMeta>, SequenceIoError> {
    let path = dir.join("meta.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|source| SequenceIoError::Io {
        file: "meta.json".into(),
        source,
    })?;
    let meta: SequenceMeta =
        serde_json::from_str(&text).map_err(|e| SequenceIoError::InvalidMeta(e.to_string()))?;
    if !(meta.fps > 0.0) {
        return Err(SequenceIoError::InvalidMeta(format!(
            "fps must be positive, got {}",
            meta.fps
        )));
    }
    Ok(Some(meta))
}

/// Loads a frame sequence from a directory of `frame_NNNNNN.pgm` files.
///
/// Frames are ordered by the numeric part of the filename and reindexed
/// from 0. Color (P6) payloads are converted to grayscale at load via
/// `round(0.299 R + 0.587 G + 0.114 B)`. When `fps` is None the sidecar's
/// value applies, falling back to [`DEFAULT_FPS`].
pub fn load_sequence(dir: &Path, fps: Option<f64>) -> Result<FrameSequence, SequenceIoError> {
    if !dir.is_dir() {
        return Err(SequenceIoError::MissingDirectory(dir.to_path_buf()));
    }
    let mut entries: Vec<(usize, PathBuf)> = Vec::new();
    let listing = fs::read_dir(dir).map_err(|source| SequenceIoError::Io {
        file: dir.display().to_string(),
        source,
    })?;
    for entry in listing {
        let entry = entry.map_err(|source| SequenceIoError::Io {
            file: dir.display().to_string(),
            source,
        })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(index) = parse_frame_index(&name) {
            entries.push((index, entry.path()));
        }
    }
    if entries.is_empty() {
        return Err(SequenceIoError::NoFrames(dir.to_path_buf()));
    }
    entries.sort_by_key(|(index, _)| *index);

    let meta = read_meta(dir)?;
    let fps = fps
        .or(meta.as_ref().map(|m| m.fps))
        .unwrap_or(DEFAULT_FPS);

    let mut frames = Vec::with_capacity(entries.len());
    let mut dims: Option<(u32, u32)> = None;
    for (position, (_, path)) in entries.iter().enumerate() {
        let file = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let bytes = fs::read(path).map_err(|source| SequenceIoError::Io {
            file: file.clone(),
            source,
        })?;
        let (w, h, pixels) = pgm::decode(&bytes).map_err(|source| SequenceIoError::Decode {
            file: file.clone(),
            source,
        })?;
        match dims {
            None => dims = Some((w, h)),
            Some((want_w, want_h)) => {
                if (w, h) != (want_w, want_h) {
                    return Err(SequenceIoError::DimensionMismatch {
                        file,
                        want_w,
                        want_h,
                        got_w: w,
                        got_h: h,
                    });
                }
            }
        }
        frames.push(Frame::new(w, h, position, pixels)?);
    }
    Ok(FrameSequence::new(frames, fps)?)
}

/// Writes each frame as binary PGM plus a `meta.json` sidecar.
///
/// Returns the number of frame files written; an empty sequence writes
/// nothing. Reloading the directory reproduces the sequence bit-exactly.
pub fn save_sequence(seq: &FrameSequence, dir: &Path) -> Result<usize, SequenceIoError> {
    fs::create_dir_all(dir).map_err(|source| SequenceIoError::Io {
        file: dir.display().to_string(),
        source,
    })?;
    for frame in seq.frames() {
        let name = frame_file_name(frame.index());
        let bytes = pgm::encode(frame.width(), frame.height(), frame.intensities());
        fs::write(dir.join(&name), bytes)
            .map_err(|source| SequenceIoError::Io { file: name, source })?;
    }
    if let Some((width, height)) = seq.dimensions() {
        let meta = SequenceMeta {
            fps: seq.fps(),
            width,
            height,
        };
        let text = serde_json::to_string_pretty(&meta)
            .map_err(|e| SequenceIoError::InvalidMeta(e.to_string()))?;
        fs::write(dir.join("meta.json"), text).map_err(|source| SequenceIoError::Io {
            file: "meta.json".into(),
            source,
        })?;
    }
    Ok(seq.len())
}

fn parse_frame_index(name: &str) -> Option<usize> {
    let stem = name
        .strip_suffix(".pgm")
        .or_else(|| name.strip_suffix(".ppm"))?;
    let digits = stem.strip_prefix("frame_")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}
