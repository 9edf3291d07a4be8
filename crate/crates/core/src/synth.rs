//! Synthetic contraction-wave sequences with known ground truth.
//!
//! Two scene models over a shared binary-noise base texture:
//!
//! - `Sinusoid`: I(x, t) = B(x) + A sin(2 pi t / period + phi(x)) with a
//!   per-pixel random phase map. With zero noise and jitter, and a period
//!   that is a whole number of frames, the sequence repeats bit-exactly.
//! - `TravelingRing`: a dark annulus whose radius sweeps inward once per
//!   period, mimicking a contraction front closing toward the camera axis.
//!
//! Optional per-frame camera jitter (whole-frame translation with edge
//! replication), per-pixel Gaussian sensor noise, and bright drifting blobs
//! that stand in for mucus. Ground truth records which frames carry a wave
//! and which were jittered.
//!
//! All randomness flows through [`SplitMix64`](crate::rng::SplitMix64)
//! streams derived from the spec seed, so a spec generates the same bytes
//! on every run. Stream layout (documented because fixtures depend on it):
//!
//! - setup stream, seed: base texture draws (one per pixel, row-major),
//!   then the sinusoid phase map (one per pixel, sinusoid mode only);
//! - frame stream, seed + (t + 1) * [`FRAME_STREAM_SALT`]: the jitter
//!   probability draw, then shift component draws while (0, 0) repeats,
//!   then one Gaussian per pixel when noise is enabled;
//! - mucus stream, seed + [`MUCUS_STREAM_SALT`]: per blob, start x, start
//!   y, then drift angle.

use serde::Serialize;
use thiserror::Error;

use crate::frame::{Frame, FrameSequence};
use crate::rng::SplitMix64;

/// Salt multiplied into the frame index for per-frame streams.
pub const FRAME_STREAM_SALT: u64 = 0xA076_1D64_78BD_642F;
/// Salt for the mucus placement stream.
pub const MUCUS_STREAM_SALT: u64 = 0x8BB8_4B93_962E_ACC9;

/// Peak-to-peak span of the binary base texture. Wide enough that a camera
/// shift pushes residual mass into the mid-range bins the motion detector
/// weights most.
const TEXTURE_SPAN: f64 = 105.0;
/// Flat intensity of mucus blobs.
const MUCUS_VALUE: u8 = 230;

/// Default wave amplitude in intensity units.
pub const DEFAULT_AMPLITUDE: f64 = 100.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMode {
    Sinusoid,
    TravelingRing,
}

/// Whole-frame translation applied to randomly selected frames.
#[derive(Debug, Clone, Copy)]
pub struct JitterSpec {
    /// Per-frame probability of a jitter event.
    pub probability: f64,
    /// Chebyshev bound on the shift; each component is drawn uniformly
    /// from [-max_shift, max_shift] with (0, 0) rejected.
    pub max_shift: u32,
}

/// Bright drifting distractor blobs.
#[derive(Debug, Clone, Copy)]
pub struct MucusSpec {
    pub blob_count: usize,
    pub blob_radius: f64,
    /// Drift speed in pixels per frame; direction is drawn per blob.
    pub drift: f64,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub mode: SynthMode,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub duration_s: f64,
    pub period_s: f64,
    pub amplitude: f64,
    pub jitter: Option<JitterSpec>,
    pub noise_sigma: f64,
    pub mucus: Option<MucusSpec>,
    pub seed: u64,
}

impl SynthSpec {
    /// Noise-free, jitter-free spec with paper-default geometry and rate.
    pub fn new(mode: SynthMode, period_s: f64, duration_s: f64, seed: u64) -> Self {
        Self {
            mode,
            width: 480,
            height: 480,
            fps: 2.0,
            duration_s,
            period_s,
            amplitude: DEFAULT_AMPLITUDE,
            jitter: None,
            noise_sigma: 0.0,
            mucus: None,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.width == 0 || self.height == 0 {
            return fail(format!("dimensions {}x{}", self.width, self.height));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return fail(format!("fps {}", self.fps));
        }
        if !(self.period_s > 0.0) {
            return fail(format!("period_s {}", self.period_s));
        }
        if self.duration_s < self.period_s {
            return fail(format!(
                "duration_s {} shorter than period_s {}",
                self.duration_s, self.period_s
            ));
        }
        if !(0.0..=127.0).contains(&self.amplitude) {
            return fail(format!("amplitude {} outside [0, 127]", self.amplitude));
        }
        if self.noise_sigma < 0.0 {
            return fail(format!("noise_sigma {}", self.noise_sigma));
        }
        if let Some(j) = &self.jitter {
            if !(0.0..=1.0).contains(&j.probability) {
                return fail(format!("jitter probability {}", j.probability));
            }
            if j.max_shift == 0 {
                return fail("jitter max_shift must be at least 1".into());
            }
        }
        if let Some(m) = &self.mucus {
            if m.blob_count == 0 || !(m.blob_radius > 0.0) || m.drift < 0.0 {
                return fail(format!(
                    "mucus blobs={} radius={} drift={}",
                    m.blob_count, m.blob_radius, m.drift
                ));
            }
        }
        Ok(())
    }

    fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }

    /// Base texture intensities: the high level keeps amplitude + base
    /// within 255, the low level sits one texture span below it.
    fn texture_levels(&self) -> (f64, f64) {
        let hi = 255.0 - self.amplitude;
        let lo = (hi - TEXTURE_SPAN).max(0.0);
        (lo, hi)
    }
}

/// Per-frame ground truth emitted alongside the frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameTruth {
    pub frame_index: usize,
    pub wave_active: bool,
    pub jittered: bool,
}

/// Drifting blob state shared by every frame.
struct MucusField {
    starts: Vec<(f64, f64)>,
    velocities: Vec<(f64, f64)>,
    radius: f64,
}

impl MucusField {
    fn new(spec: &MucusSpec, seed: u64, width: u32, height: u32) -> Self {
        let mut rng = SplitMix64::new(seed.wrapping_add(MUCUS_STREAM_SALT));
        let mut starts = Vec::with_capacity(spec.blob_count);
        let mut velocities = Vec::with_capacity(spec.blob_count);
        for _ in 0..spec.blob_count {
            let x = rng.next_f64() * width as f64;
            let y = rng.next_f64() * height as f64;
            let angle = std::f64::consts::TAU * rng.next_f64();
            starts.push((x, y));
            velocities.push((spec.drift * angle.cos(), spec.drift * angle.sin()));
        }
        Self {
            starts,
            velocities,
            radius: spec.blob_radius,
        }
    }

    fn paint(&self, scene: &mut [f64], width: u32, height: u32, t: usize) {
        let (w, h) = (width as f64, height as f64);
        for (&(sx, sy), &(vx, vy)) in self.starts.iter().zip(&self.velocities) {
            let cx = (sx + vx * t as f64).rem_euclid(w);
            let cy = (sy + vy * t as f64).rem_euclid(h);
            let r = self.radius;
            let x_lo = (cx - r).floor() as i64;
            let x_hi = (cx + r).ceil() as i64;
            let y_lo = (cy - r).floor() as i64;
            let y_hi = (cy + r).ceil() as i64;
            for y in y_lo..=y_hi {
                for x in x_lo..=x_hi {
                    // torus metric so blobs wrap instead of popping
                    let dx = (x as f64 - cx).abs();
                    let dx = dx.min(w - dx);
                    let dy = (y as f64 - cy).abs();
                    let dy = dy.min(h - dy);
                    if dx * dx + dy * dy <= r * r {
                        let xi = (x.rem_euclid(width as i64)) as usize;
                        let yi = (y.rem_euclid(height as i64)) as usize;
                        scene[yi * width as usize + xi] = MUCUS_VALUE as f64;
                    }
                }
            }
        }
    }
}

/// Generates the frame sequence and its per-frame ground truth.
pub fn generate(spec: &SynthSpec) -> Result<(FrameSequence, Vec<FrameTruth>), SynthError> {
    spec.validate()?;
    let (width, height) = (spec.width, spec.height);
    let pixels = width as usize * height as usize;
    let n = spec.frame_count();
    if n == 0 {
        return Err(SynthError::InvalidSpec(
            "duration and fps admit zero frames".into(),
        ));
    }

    let mut setup = SplitMix64::new(spec.seed);
    let (lo, hi) = spec.texture_levels();
    let base: Vec<f64> = (0..pixels)
        .map(|_| if setup.next_f64() < 0.5 { lo } else { hi })
        .collect();
    let phase: Vec<f64> = match spec.mode {
        SynthMode::Sinusoid => (0..pixels)
            .map(|_| std::f64::consts::TAU * setup.next_f64())
            .collect(),
        SynthMode::TravelingRing => Vec::new(),
    };
    let dist = radial_distances(width, height);
    let mucus = spec
        .mucus
        .as_ref()
        .map(|m| MucusField::new(m, spec.seed, width, height));

    // integer frame arithmetic keeps the cycle position bit-exact when the
    // period is a whole number of frames
    let period_frames_f = spec.period_s * spec.fps;
    let period_frames_int = if (period_frames_f - period_frames_f.round()).abs() < 1e-9 {
        Some(period_frames_f.round() as usize)
    } else {
        None
    };

    let wave_active = spec.amplitude > 0.0;
    let mut frames = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut scene = vec![0.0f64; pixels];

    for t in 0..n {
        let cycle_frac = match period_frames_int {
            Some(pf) => (t % pf) as f64 / pf as f64,
            None => {
                let cycles = t as f64 / spec.fps / spec.period_s;
                cycles - cycles.floor()
            }
        };
        render_scene(spec, &base, &phase, &dist, cycle_frac, &mut scene);
        if let Some(field) = &mucus {
            field.paint(&mut scene, width, height, t);
        }

        let mut frame_rng =
            SplitMix64::new(spec.seed.wrapping_add((t as u64 + 1).wrapping_mul(FRAME_STREAM_SALT)));
        let mut jittered = false;
        let mut shift = (0i64, 0i64);
        if let Some(j) = &spec.jitter {
            if frame_rng.next_f64() < j.probability {
                jittered = true;
                let span = 2 * j.max_shift as u64 + 1;
                loop {
                    let dx = frame_rng.next_below(span) as i64 - j.max_shift as i64;
                    let dy = frame_rng.next_below(span) as i64 - j.max_shift as i64;
                    if dx != 0 || dy != 0 {
                        shift = (dx, dy);
                        break;
                    }
                }
            }
        }

        let mut out = vec![0u8; pixels];
        let (dx, dy) = shift;
        for y in 0..height as i64 {
            let src_y = (y - dy).clamp(0, height as i64 - 1) as usize;
            for x in 0..width as i64 {
                let src_x = (x - dx).clamp(0, width as i64 - 1) as usize;
                let mut v = scene[src_y * width as usize + src_x];
                if spec.noise_sigma > 0.0 {
                    v += spec.noise_sigma * frame_rng.next_gaussian();
                }
                out[y as usize * width as usize + x as usize] =
                    v.round().clamp(0.0, 255.0) as u8;
            }
        }

        frames.push(Frame::new(width, height, t, out).expect("buffer sized to dimensions"));
        truth.push(FrameTruth {
            frame_index: t,
            wave_active,
            jittered,
        });
    }

    let seq = FrameSequence::new(frames, spec.fps)
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok((seq, truth))
}

fn render_scene(
    spec: &SynthSpec,
    base: &[f64],
    phase: &[f64],
    dist: &[f64],
    cycle_frac: f64,
    scene: &mut [f64],
) {
    match spec.mode {
        SynthMode::Sinusoid => {
            let theta0 = std::f64::consts::TAU * cycle_frac;
            for (i, out) in scene.iter_mut().enumerate() {
                *out = base[i] + spec.amplitude * (theta0 + phase[i]).sin();
            }
        }
        SynthMode::TravelingRing => {
            let radius_max = ring_radius_bounds(spec.width, spec.height).1;
            let radius_min = ring_radius_bounds(spec.width, spec.height).0;
            let r = radius_max - (radius_max - radius_min) * cycle_frac;
            let sigma = ring_sigma(spec.width, spec.height);
            let denom = 2.0 * sigma * sigma;
            for (i, out) in scene.iter_mut().enumerate() {
                let d = dist[i] - r;
                *out = base[i] - spec.amplitude * (-d * d / denom).exp();
            }
        }
    }
}

fn radial_distances(width: u32, height: u32) -> Vec<f64> {
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            out.push((dx * dx + dy * dy).sqrt());
        }
    }
    out
}

fn ring_radius_bounds(width: u32, height: u32) -> (f64, f64) {
    let r = width.min(height) as f64 / 2.0;
    (0.15 * r, 0.85 * r)
}

fn ring_sigma(width: u32, height: u32) -> f64 {
    (0.04 * width.min(height) as f64 / 2.0).max(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_spec(mode: SynthMode, seed: u64) -> SynthSpec {
        SynthSpec {
            width: 64,
            height: 64,
            ..SynthSpec::new(mode, 20.0, 120.0, seed)
        }
    }

    #[test]
    fn sinusoid_repeats_bit_exactly_after_one_period() {
        let (seq, _) = generate(&desk_spec(SynthMode::Sinusoid, 7)).unwrap();
        let frames = seq.frames();
        // 20 s at 2 fps = 40 frames
        for t in 0..frames.len() - 40 {
            assert_eq!(
                frames[t].intensities(),
                frames[t + 40].intensities(),
                "frame {t} vs {}",
                t + 40
            );
        }
    }

    #[test]
    fn ring_repeats_bit_exactly_after_one_period() {
        let (seq, _) = generate(&desk_spec(SynthMode::TravelingRing, 3)).unwrap();
        let frames = seq.frames();
        assert_eq!(frames[0].intensities(), frames[40].intensities());
        assert_ne!(frames[0].intensities(), frames[20].intensities());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut spec = desk_spec(SynthMode::Sinusoid, 7);
        spec.noise_sigma = 4.0;
        spec.jitter = Some(JitterSpec {
            probability: 0.2,
            max_shift: 8,
        });
        let (a, truth_a) = generate(&spec).unwrap();
        let (b, truth_b) = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(truth_a, truth_b);
    }

    #[test]
    fn different_seeds_differ() {
        let (a, _) = generate(&desk_spec(SynthMode::Sinusoid, 1)).unwrap();
        let (b, _) = generate(&desk_spec(SynthMode::Sinusoid, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn truth_marks_wave_activity_and_jitter() {
        let mut spec = desk_spec(SynthMode::Sinusoid, 11);
        spec.jitter = Some(JitterSpec {
            probability: 0.5,
            max_shift: 4,
        });
        let (seq, truth) = generate(&spec).unwrap();
        assert_eq!(truth.len(), seq.len());
        assert!(truth.iter().all(|t| t.wave_active));
        let jittered = truth.iter().filter(|t| t.jittered).count();
        // p = 0.5 over 240 frames; far from both extremes
        assert!(jittered > 80 && jittered < 160, "jittered = {jittered}");
    }

    #[test]
    fn zero_amplitude_means_no_wave() {
        let mut spec = desk_spec(SynthMode::Sinusoid, 11);
        spec.amplitude = 0.0;
        let (_, truth) = generate(&spec).unwrap();
        assert!(truth.iter().all(|t| !t.wave_active));
    }

    #[test]
    fn mucus_touches_only_blob_footprints() {
        let spec = desk_spec(SynthMode::Sinusoid, 5);
        let mut with = spec.clone();
        with.mucus = Some(MucusSpec {
            blob_count: 3,
            blob_radius: 4.0,
            drift: 1.5,
        });
        let (plain, _) = generate(&spec).unwrap();
        let (mucussed, _) = generate(&with).unwrap();
        let bound = 3.0 * std::f64::consts::PI * 5.0 * 5.0;
        let mut any = 0usize;
        for (a, b) in plain.frames().iter().zip(mucussed.frames()) {
            let changed = a
                .intensities()
                .iter()
                .zip(b.intensities())
                .filter(|(x, y)| x != y)
                .count();
            assert!(
                (changed as f64) <= bound,
                "changed {changed} exceeds footprint bound {bound}"
            );
            any += changed;
        }
        assert!(any > 0, "mucus must actually paint something");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = desk_spec(SynthMode::Sinusoid, 1);
        s.period_s = 0.0;
        assert!(generate(&s).is_err());

        let mut s = desk_spec(SynthMode::Sinusoid, 1);
        s.duration_s = 10.0; // shorter than the period
        assert!(generate(&s).is_err());

        let mut s = desk_spec(SynthMode::Sinusoid, 1);
        s.amplitude = 128.0;
        assert!(generate(&s).is_err());

        let mut s = desk_spec(SynthMode::Sinusoid, 1);
        s.jitter = Some(JitterSpec {
            probability: 1.5,
            max_shift: 2,
        });
        assert!(generate(&s).is_err());
    }

    #[test]
    fn amplitude_plus_base_stays_within_range() {
        for amplitude in [0.0, 60.0, 100.0, 127.0] {
            let mut spec = desk_spec(SynthMode::Sinusoid, 2);
            spec.amplitude = amplitude;
            let (lo, hi) = spec.texture_levels();
            assert!(hi + amplitude <= 255.0);
            assert!(lo >= 0.0);
        }
    }
}
