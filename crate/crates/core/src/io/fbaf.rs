//! FBAF: a minimal multi-channel float container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FBAF"
//! 4       1     version (1)
//! 5       4     width     u32 LE
//! 9       4     height    u32 LE
//! 13      4     channels  u32 LE
//! 17      ...   channels × height × width f32 LE, planar, row-major, top-down
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::{ColorMap, PixelMap, PredictionSet};

use super::io_err;

pub const MAGIC: &[u8; 4] = b"FBAF";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct FbafContainer {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    pub data: Vec<f32>,
}

impl FbafContainer {
    pub fn new(width: u32, height: u32, channels: u32, data: Vec<f32>) -> Self {
        assert_eq!(
            data.len(),
            width as usize * height as usize * channels as usize,
            "FBAF payload length must match header"
        );
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn from_pixel_map(m: &PixelMap) -> Self {
        Self::new(m.width() as u32, m.height() as u32, 1, m.data().to_vec())
    }

    pub fn from_color_map(m: &ColorMap) -> Self {
        Self::new(m.width() as u32, m.height() as u32, 3, m.data().to_vec())
    }

    /// Stacks single-channel maps into one container.
    pub fn from_planes(planes: &[&PixelMap]) -> Self {
        let (w, h) = planes[0].dims();
        let mut data = Vec::with_capacity(planes.len() * w * h);
        for p in planes {
            assert_eq!(p.dims(), (w, h), "planes must share dimensions");
            data.extend_from_slice(p.data());
        }
        Self::new(w as u32, h as u32, planes.len() as u32, data)
    }

    /// α, F (3) and B (3) as seven channels.
    pub fn from_prediction(p: &PredictionSet) -> Self {
        let (w, h) = p.dims();
        let mut data = Vec::with_capacity(7 * w * h);
        data.extend_from_slice(p.alpha.data());
        data.extend_from_slice(p.fg.data());
        data.extend_from_slice(p.bg.data());
        Self::new(w as u32, h as u32, 7, data)
    }

    fn plane_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn plane(&self, c: usize) -> PixelMap {
        let n = self.plane_len();
        PixelMap::new(
            self.width as usize,
            self.height as usize,
            self.data[c * n..(c + 1) * n].to_vec(),
        )
    }

    pub fn into_pixel_map(self) -> Result<PixelMap, String> {
        if self.channels != 1 {
            return Err(format!("expected 1 channel, found {}", self.channels));
        }
        Ok(PixelMap::new(self.width as usize, self.height as usize, self.data))
    }

    pub fn into_color_map(self) -> Result<ColorMap, String> {
        if self.channels != 3 {
            return Err(format!("expected 3 channels, found {}", self.channels));
        }
        Ok(ColorMap::new(self.width as usize, self.height as usize, self.data))
    }

    pub fn into_prediction(self) -> Result<PredictionSet, String> {
        if self.channels != 7 {
            return Err(format!("expected 7 channels, found {}", self.channels));
        }
        let (w, h) = (self.width as usize, self.height as usize);
        let n = w * h;
        let alpha = PixelMap::new(w, h, self.data[..n].to_vec());
        let fg = ColorMap::new(w, h, self.data[n..4 * n].to_vec());
        let bg = ColorMap::new(w, h, self.data[4 * n..].to_vec());
        PredictionSet::new(alpha, fg, bg).map_err(|e| e.to_string())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.channels.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_LEN {
            return Err(format!("file is {} bytes, shorter than the header", bytes.len()));
        }
        if &bytes[..4] != MAGIC {
            return Err("bad magic, expected FBAF".into());
        }
        if bytes[4] != VERSION {
            return Err(format!("unsupported version {}", bytes[4]));
        }
        let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let (width, height, channels) = (word(5), word(9), word(13));
        let count = (width as u64) * (height as u64) * (channels as u64);
        let expected = HEADER_LEN as u64 + 4 * count;
        if bytes.len() as u64 != expected {
            return Err(format!(
                "payload length mismatch: header declares {width}x{height}x{channels} ({expected} bytes), file has {}",
                bytes.len()
            ));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }
}

pub fn read(path: impl AsRef<Path>) -> Result<FbafContainer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    FbafContainer::from_bytes(&bytes).map_err(|m| Error::format(path, m))
}

pub fn write(c: &FbafContainer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, c.to_bytes()).map_err(|e| io_err(path, e))
}
