//! File formats: PFM for single-channel float maps, the FBAF container for
//! multi-channel float data, and 8/16-bit PNG for integer images.
//!
//! [`read_pixel_map`] and [`read_color_map`] dispatch on the file extension.

pub mod fbaf;
pub mod pfm;
pub mod png;

use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::{ColorMap, PixelMap};

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a single-channel map from `.pfm`, `.fbaf` or `.png`.
pub fn read_pixel_map(path: impl AsRef<Path>) -> Result<PixelMap> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => pfm::read_pixel(path),
        "fbaf" => {
            let c = fbaf::read(path)?;
            c.into_pixel_map().map_err(|m| Error::format(path, m))
        }
        "png" => png::read_pixel(path),
        other => Err(Error::format(path, format!("unsupported extension `{other}`"))),
    }
}

/// Reads a three-channel map from `.fbaf`, `.pfm` (color) or `.png`.
pub fn read_color_map(path: impl AsRef<Path>) -> Result<ColorMap> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => pfm::read_color(path),
        "fbaf" => {
            let c = fbaf::read(path)?;
            c.into_color_map().map_err(|m| Error::format(path, m))
        }
        "png" => png::read_color(path),
        other => Err(Error::format(path, format!("unsupported extension `{other}`"))),
    }
}

/// Writes a single-channel map; `.png` is written at 8 bits.
pub fn write_pixel_map(map: &PixelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => pfm::write_pixel(map, path),
        "fbaf" => fbaf::write(&fbaf::FbafContainer::from_pixel_map(map), path),
        "png" => png::write_pixel(map, path, png::BitDepth::Eight),
        other => Err(Error::format(path, format!("unsupported extension `{other}`"))),
    }
}

/// Writes a three-channel map; `.png` is written at 8 bits.
pub fn write_color_map(map: &ColorMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => pfm::write_color(map, path),
        "fbaf" => fbaf::write(&fbaf::FbafContainer::from_color_map(map), path),
        "png" => png::write_color(map, path, png::BitDepth::Eight),
        other => Err(Error::format(path, format!("unsupported extension `{other}`"))),
    }
}
