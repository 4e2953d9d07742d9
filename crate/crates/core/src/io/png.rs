//! 8- and 16-bit PNG. Integer samples are normalized by 255 or 65535 on
//! load and rounded back on save.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::maps::{ColorMap, PixelMap};

use super::io_err;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

pub fn open(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn save(path: &Path, img: &DynamicImage) -> Result<()> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    std::fs::write(path, buf.into_inner()).map_err(|e| io_err(path, e))
}

fn is_sixteen(img: &DynamicImage) -> bool {
    img.color().bytes_per_pixel() / img.color().channel_count() == 2
}

pub fn read_color(path: impl AsRef<Path>) -> Result<ColorMap> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if is_sixteen(&img) {
        let rgb = img.into_rgb16();
        let raw = rgb.as_raw();
        Ok(ColorMap::from_fn(w, h, |c, x, y| {
            raw[3 * (y * w + x) + c] as f32 / 65535.0
        }))
    } else {
        let rgb = img.into_rgb8();
        let raw = rgb.as_raw();
        Ok(ColorMap::from_fn(w, h, |c, x, y| raw[3 * (y * w + x) + c] as f32 / 255.0))
    }
}

/// Reads a grayscale PNG; color images contribute their first channel.
pub fn read_pixel(path: impl AsRef<Path>) -> Result<PixelMap> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = img.color().channel_count() <= 2;
    if is_sixteen(&img) {
        let data: Vec<f32> = if gray {
            img.into_luma16().as_raw().iter().map(|&v| v as f32 / 65535.0).collect()
        } else {
            img.into_rgb16().as_raw().iter().step_by(3).map(|&v| v as f32 / 65535.0).collect()
        };
        Ok(PixelMap::new(w, h, data))
    } else {
        let data: Vec<f32> = if gray {
            img.into_luma8().as_raw().iter().map(|&v| v as f32 / 255.0).collect()
        } else {
            img.into_rgb8().as_raw().iter().step_by(3).map(|&v| v as f32 / 255.0).collect()
        };
        Ok(PixelMap::new(w, h, data))
    }
}

fn quantize8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn quantize16(v: f32) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

pub fn write_color(map: &ColorMap, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let (w, h) = map.dims();
    let img = match depth {
        BitDepth::Eight => {
            let mut raw = Vec::with_capacity(3 * w * h);
            for y in 0..h {
                for x in 0..w {
                    raw.extend(map.pixel(x, y).map(quantize8));
                }
            }
            DynamicImage::ImageRgb8(image::RgbImage::from_raw(w as u32, h as u32, raw).unwrap())
        }
        BitDepth::Sixteen => {
            let mut raw = Vec::with_capacity(3 * w * h);
            for y in 0..h {
                for x in 0..w {
                    raw.extend(map.pixel(x, y).map(quantize16));
                }
            }
            DynamicImage::ImageRgb16(image::ImageBuffer::from_raw(w as u32, h as u32, raw).unwrap())
        }
    };
    save(path.as_ref(), &img)
}

pub fn write_pixel(map: &PixelMap, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let (w, h) = (map.width() as u32, map.height() as u32);
    let img = match depth {
        BitDepth::Eight => DynamicImage::ImageLuma8(
            image::GrayImage::from_raw(w, h, map.data().iter().map(|&v| quantize8(v)).collect())
                .unwrap(),
        ),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(
            image::ImageBuffer::from_raw(w, h, map.data().iter().map(|&v| quantize16(v)).collect())
                .unwrap(),
        ),
    };
    save(path.as_ref(), &img)
}
