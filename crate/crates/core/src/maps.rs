//! Image containers and the compositing equation.
//!
//! `PixelMap` holds one scalar per pixel (alpha mattes, single channels),
//! `ColorMap` holds three planar channels. Values are `f32`; every sum
//! over pixels in this crate accumulates in `f64`.
//!
//! Compositing operates on whatever encoding the files carry. No gamma
//! linearization is applied anywhere.

use crate::error::{check_dims, Result};

/// Single-channel row-major float image.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl PixelMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "PixelMap data length must equal width * height"
        );
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// True when every value lies in `[0, 1]`.
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Three-channel planar float image (channel-major, each plane row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ColorMap {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(
            data.len(),
            3 * width * height,
            "ColorMap data length must equal 3 * width * height"
        );
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let n = width * height;
        let mut data = Vec::with_capacity(3 * n);
        for c in rgb {
            data.extend(std::iter::repeat_n(c, n));
        }
        Self::new(width, height, data)
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, [0.0; 3])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut data = Vec::with_capacity(3 * width * height);
        for c in 0..3 {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, x, y));
                }
            }
        }
        Self::new(width, height, data)
    }

    pub fn from_planes(planes: [PixelMap; 3]) -> Self {
        let (w, h) = planes[0].dims();
        assert!(
            planes.iter().all(|p| p.dims() == (w, h)),
            "ColorMap planes must share dimensions"
        );
        let mut data = Vec::with_capacity(3 * w * h);
        for p in planes {
            data.extend(p.into_data());
        }
        Self::new(w, h, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Copies channel `c` out as a `PixelMap`.
    pub fn channel(&self, c: usize) -> PixelMap {
        PixelMap::new(self.width, self.height, self.plane(c).to_vec())
    }

    pub fn channels(&self) -> [PixelMap; 3] {
        [self.channel(0), self.channel(1), self.channel(2)]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        [self.get(0, x, y), self.get(1, x, y), self.get(2, x, y)]
    }

    /// Applies `f` to each channel independently.
    pub fn map_channels(&self, mut f: impl FnMut(&PixelMap) -> PixelMap) -> Self {
        let [r, g, b] = self.channels();
        Self::from_planes([f(&r), f(&g), f(&b)])
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// The predicted (or ground-truth) alpha, foreground and background layers
/// of one image: the 7 output channels of an FBA network.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub alpha: PixelMap,
    pub fg: ColorMap,
    pub bg: ColorMap,
}

impl PredictionSet {
    pub fn new(alpha: PixelMap, fg: ColorMap, bg: ColorMap) -> Result<Self> {
        check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
        check_dims("alpha", alpha.dims(), "bg", bg.dims())?;
        Ok(Self { alpha, fg, bg })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.alpha.dims()
    }

    pub fn is_unit_range(&self) -> bool {
        self.alpha.is_unit_range() && self.fg.is_unit_range() && self.bg.is_unit_range()
    }
}

/// `C = αF + (1 − α)B`, per channel.
pub fn composite(alpha: &PixelMap, fg: &ColorMap, bg: &ColorMap) -> Result<ColorMap> {
    check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
    check_dims("alpha", alpha.dims(), "bg", bg.dims())?;
    let a = alpha.data();
    let mut out = Vec::with_capacity(fg.data().len());
    for c in 0..3 {
        let f = fg.plane(c);
        let b = bg.plane(c);
        out.extend(
            a.iter()
                .zip(f.iter().zip(b))
                .map(|(&a, (&f, &b))| a * f + (1.0 - a) * b),
        );
    }
    Ok(ColorMap::new(alpha.width(), alpha.height(), out))
}

/// `αF`, per channel.
pub fn premultiply(alpha: &PixelMap, fg: &ColorMap) -> Result<ColorMap> {
    check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
    let a = alpha.data();
    let mut out = Vec::with_capacity(fg.data().len());
    for c in 0..3 {
        out.extend(a.iter().zip(fg.plane(c)).map(|(&a, &f)| a * f));
    }
    Ok(ColorMap::new(alpha.width(), alpha.height(), out))
}

#[inline]
pub(crate) fn clamp01(v: f32) -> f32 {
    v.clamp(0.0, 1.0)
}

/// Clamping of every value to `[0, 1]`.
pub trait ClampUnit {
    fn clamp_unit(&self) -> Self;
}

impl ClampUnit for PixelMap {
    fn clamp_unit(&self) -> Self {
        self.map(clamp01)
    }
}

impl ClampUnit for ColorMap {
    fn clamp_unit(&self) -> Self {
        self.map(clamp01)
    }
}

impl ClampUnit for PredictionSet {
    fn clamp_unit(&self) -> Self {
        Self {
            alpha: self.alpha.clamp_unit(),
            fg: self.fg.clamp_unit(),
            bg: self.bg.clamp_unit(),
        }
    }
}

pub fn clamp_unit<T: ClampUnit>(map: &T) -> T {
    map.clamp_unit()
}
