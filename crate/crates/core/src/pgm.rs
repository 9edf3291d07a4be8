//! Minimal binary netpbm codec: P5 (graymap) out, P5/P6 in.
//!
//! Writing always produces maxval-255 P5. Reading also accepts P6 color
//! payloads, which are collapsed to grayscale with the BT.601 luma weights
//! `round(0.299 R + 0.587 G + 0.114 B)` so downstream code only ever sees
//! single-channel frames.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("bad magic number; expected P5 or P6")]
    BadMagic,
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported maxval {0}; only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("pixel payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

/// Encodes a grayscale frame as binary PGM (P5, maxval 255).
pub fn encode(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width as usize * height as usize);
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(pixels);
    out
}

/// Decodes a binary P5 or P6 payload to (width, height, gray pixels).
pub fn decode(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), PgmError> {
    if bytes.len() < 2 {
        return Err(PgmError::BadMagic);
    }
    let channels = match &bytes[..2] {
        b"P5" => 1usize,
        b"P6" => 3usize,
        _ => return Err(PgmError::BadMagic),
    };
    let mut pos = 2;
    let width = read_header_number(bytes, &mut pos)?;
    let height = read_header_number(bytes, &mut pos)?;
    let maxval = read_header_number(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(PgmError::Header("missing raster separator".into())),
    }
    let count = width as usize * height as usize;
    let expected = count * channels;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: raster.len(),
        });
    }
    let pixels = if channels == 1 {
        raster[..expected].to_vec()
    } else {
        raster[..expected]
            .chunks_exact(3)
            .map(|rgb| luma(rgb[0], rgb[1], rgb[2]))
            .collect()
    };
    Ok((width, height, pixels))
}

#[inline]
fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

/// Reads one ASCII decimal from the header, skipping whitespace and
/// `#` comments.
fn read_header_number(bytes: &[u8], pos: &mut usize) -> Result<u32, PgmError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(PgmError::Header("expected a decimal field".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PgmError::Header("field out of range".into()))
}

/// Builds a binary P6 payload; only used to exercise the color path in tests.
pub fn encode_ppm_for_tests(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    debug_assert_eq!(rgb.len(), 3 * width as usize * height as usize);
    let header = format!("P6\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + rgb.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(rgb);
    out
}
