//! Portable Float Map.
//!
//! Header: `Pf` (gray) or `PF` (RGB), then `width height`, then a scale
//! whose sign gives the byte order (negative = little-endian). Rows are
//! stored bottom-up. Writers here always emit little-endian with scale
//! `-1.0`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::{ColorMap, PixelMap};

use super::io_err;

#[derive(Debug, Clone, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Interleaved, top-down.
    pub data: Vec<f32>,
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        None
    } else {
        std::str::from_utf8(&bytes[start..*pos]).ok()
    }
}

pub fn decode(bytes: &[u8]) -> Result<Pfm, String> {
    let mut pos = 0;
    let channels = match next_token(bytes, &mut pos) {
        Some("Pf") => 1,
        Some("PF") => 3,
        other => return Err(format!("bad PFM magic {other:?}")),
    };
    let mut num = |what: &str| -> Result<&str, String> {
        next_token(bytes, &mut pos).ok_or_else(|| format!("missing {what}"))
    };
    let width: usize = num("width")?.parse().map_err(|_| "bad width".to_string())?;
    let height: usize = num("height")?.parse().map_err(|_| "bad height".to_string())?;
    let scale: f64 = num("scale")?.parse().map_err(|_| "bad scale".to_string())?;
    if scale == 0.0 || !scale.is_finite() {
        return Err("scale must be non-zero".into());
    }
    // exactly one whitespace byte separates the header from the payload
    pos += 1;
    let count = width * height * channels;
    if bytes.len() < pos || bytes.len() - pos != 4 * count {
        return Err(format!(
            "payload length mismatch: expected {} bytes for {width}x{height}x{channels}",
            4 * count
        ));
    }
    let little = scale < 0.0;
    let raw: Vec<f32> = bytes[pos..]
        .chunks_exact(4)
        .map(|c| {
            let b: [u8; 4] = c.try_into().unwrap();
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let row = width * channels;
    let mut data = Vec::with_capacity(count);
    for y in (0..height).rev() {
        data.extend_from_slice(&raw[y * row..(y + 1) * row]);
    }
    Ok(Pfm {
        width,
        height,
        channels,
        data,
    })
}

pub fn encode(pfm: &Pfm) -> Vec<u8> {
    let magic = if pfm.channels == 1 { "Pf" } else { "PF" };
    let mut out = format!("{magic}\n{} {}\n-1.0\n", pfm.width, pfm.height).into_bytes();
    let row = pfm.width * pfm.channels;
    for y in (0..pfm.height).rev() {
        for v in &pfm.data[y * row..(y + 1) * row] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn read(path: &Path) -> Result<Pfm> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    decode(&bytes).map_err(|m| Error::format(path, m))
}

pub fn read_pixel(path: impl AsRef<Path>) -> Result<PixelMap> {
    let path = path.as_ref();
    let pfm = read(path)?;
    if pfm.channels != 1 {
        return Err(Error::format(path, "expected a single-channel (Pf) map"));
    }
    Ok(PixelMap::new(pfm.width, pfm.height, pfm.data))
}

pub fn read_color(path: impl AsRef<Path>) -> Result<ColorMap> {
    let path = path.as_ref();
    let pfm = read(path)?;
    if pfm.channels != 3 {
        return Err(Error::format(path, "expected a color (PF) map"));
    }
    let (w, h) = (pfm.width, pfm.height);
    Ok(ColorMap::from_fn(w, h, |c, x, y| pfm.data[3 * (y * w + x) + c]))
}

pub fn write_pixel(map: &PixelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let pfm = Pfm {
        width: map.width(),
        height: map.height(),
        channels: 1,
        data: map.data().to_vec(),
    };
    std::fs::write(path, encode(&pfm)).map_err(|e| io_err(path, e))
}

pub fn write_color(map: &ColorMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = map.dims();
    let mut data = Vec::with_capacity(3 * w * h);
    for y in 0..h {
        for x in 0..w {
            data.extend(map.pixel(x, y));
        }
    }
    let pfm = Pfm {
        width: w,
        height: h,
        channels: 3,
        data,
    };
    std::fs::write(path, encode(&pfm)).map_err(|e| io_err(path, e))
}
