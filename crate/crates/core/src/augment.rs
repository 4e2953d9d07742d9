//! Training-sample composition and test-time augmentation.
//!
//! Samples are always composited from geometrically transformed layers
//! (`fg`, `α`, `bg`), never by resampling a finished composite. Foreground
//! colors are resampled premultiplied by alpha, so colors stored under
//! `α = 0` never leak into the composite.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::filter::{nearest_indices, resize_bilinear};
use crate::maps::{clamp01, composite, ColorMap, PixelMap, PredictionSet};
use crate::trimap::{trimap_with_radii, draw_radii, BorderPolicy, Label, Trimap};

pub const CROP_SIZES: [u32; 3] = [320, 480, 640];
pub const GAMMA_RANGE: (f64, f64) = (0.5, 2.0);
pub const BRIGHTNESS_RANGE: (f64, f64) = (-0.1, 0.1);

// ---------------------------------------------------------------------------
// Dihedral transforms

/// Horizontal mirror followed by `quarter_turns` counter-clockwise rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dihedral {
    pub quarter_turns: u8,
    pub flip: bool,
}

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral {
        quarter_turns: 0,
        flip: false,
    };

    /// All eight elements of the group.
    pub fn all() -> [Dihedral; 8] {
        let mut out = [Self::IDENTITY; 8];
        for (i, o) in out.iter_mut().enumerate() {
            *o = Dihedral {
                quarter_turns: (i % 4) as u8,
                flip: i >= 4,
            };
        }
        out
    }

    pub fn output_dims(self, w: usize, h: usize) -> (usize, usize) {
        if self.quarter_turns % 2 == 1 {
            (h, w)
        } else {
            (w, h)
        }
    }

    /// For each output pixel (row-major), the index of the input pixel it
    /// copies.
    pub fn source_indices(self, w: usize, h: usize) -> Vec<usize> {
        let (ow, oh) = self.output_dims(w, h);
        let mut idx = Vec::with_capacity(w * h);
        for oy in 0..oh {
            for ox in 0..ow {
                // undo the rotation, then the mirror
                let (mut x, mut y) = (ox, oy);
                let (mut cw, mut ch) = (ow, oh);
                for _ in 0..self.quarter_turns % 4 {
                    // one CCW turn maps (x, y) of a W×H image to (y, W−1−x)
                    let (px, py) = (ch - 1 - y, x);
                    (cw, ch) = (ch, cw);
                    (x, y) = (px, py);
                }
                debug_assert_eq!((cw, ch), (w, h));
                if self.flip {
                    x = w - 1 - x;
                }
                idx.push(y * w + x);
            }
        }
        idx
    }

    fn gather<T: Copy>(src: &[T], idx: &[usize]) -> Vec<T> {
        idx.iter().map(|&i| src[i]).collect()
    }

    fn scatter<T: Copy + Default>(src: &[T], idx: &[usize]) -> Vec<T> {
        let mut out = vec![T::default(); src.len()];
        for (o, &i) in idx.iter().enumerate() {
            out[i] = src[o];
        }
        out
    }

    pub fn apply_pixel(self, map: &PixelMap) -> PixelMap {
        let (w, h) = map.dims();
        let (ow, oh) = self.output_dims(w, h);
        PixelMap::new(ow, oh, Self::gather(map.data(), &self.source_indices(w, h)))
    }

    pub fn apply_color(self, map: &ColorMap) -> ColorMap {
        let (w, h) = map.dims();
        let (ow, oh) = self.output_dims(w, h);
        let idx = self.source_indices(w, h);
        let mut data = Vec::with_capacity(3 * w * h);
        for c in 0..3 {
            data.extend(Self::gather(map.plane(c), &idx));
        }
        ColorMap::new(ow, oh, data)
    }

    pub fn apply_trimap(self, t: &Trimap) -> Trimap {
        let (w, h) = t.dims();
        let (ow, oh) = self.output_dims(w, h);
        Trimap::new(ow, oh, Self::gather(t.labels(), &self.source_indices(w, h)))
    }

    /// Undoes `apply_pixel` for an input of original size `w × h`.
    pub fn invert_pixel(self, map: &PixelMap, w: usize, h: usize) -> PixelMap {
        PixelMap::new(w, h, Self::scatter(map.data(), &self.source_indices(w, h)))
    }

    pub fn invert_color(self, map: &ColorMap, w: usize, h: usize) -> ColorMap {
        let idx = self.source_indices(w, h);
        let mut data = Vec::with_capacity(3 * w * h);
        for c in 0..3 {
            data.extend(Self::scatter(map.plane(c), &idx));
        }
        ColorMap::new(w, h, data)
    }
}

// ---------------------------------------------------------------------------
// Test-time augmentation

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTATransform {
    /// Counter-clockwise rotation in degrees, a multiple of 90.
    pub rotation: u16,
    /// Horizontal mirror, applied before the rotation.
    pub flip: bool,
    pub scale: f64,
}

pub const TTA_SCALES: [f64; 3] = [0.5, 1.0, 2.0];

impl TTATransform {
    pub fn new(rotation: u16, flip: bool, scale: f64) -> Result<Self> {
        let t = Self {
            rotation,
            flip,
            scale,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotation % 90 != 0 || self.rotation >= 360 {
            return Err(Error::invalid("rotation", "must be 0, 90, 180 or 270"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid("scale", "must be positive"));
        }
        Ok(())
    }

    /// The eight rotation/flip combinations at unit scale.
    pub fn dihedral_set() -> Vec<TTATransform> {
        Self::with_scales(&[1.0])
    }

    pub fn with_scales(scales: &[f64]) -> Vec<TTATransform> {
        let mut out = Vec::new();
        for &scale in scales {
            for d in Dihedral::all() {
                out.push(TTATransform {
                    rotation: d.quarter_turns as u16 * 90,
                    flip: d.flip,
                    scale,
                });
            }
        }
        out
    }

    pub fn dihedral(&self) -> Dihedral {
        Dihedral {
            quarter_turns: (self.rotation / 90) as u8,
            flip: self.flip,
        }
    }

    fn scaled_dims(&self, w: usize, h: usize) -> (usize, usize) {
        let s = |n: usize| ((n as f64 * self.scale).round() as usize).max(1);
        (s(w), s(h))
    }
}

impl fmt::Display for TTATransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rot{}", self.rotation)?;
        if self.flip {
            write!(f, "-flip")?;
        }
        if self.scale != 1.0 {
            write!(f, "@{}", self.scale)?;
        }
        Ok(())
    }
}

impl FromStr for TTATransform {
    type Err = Error;

    /// Parses `rot<deg>[-flip][@<scale>]`, e.g. `rot90-flip@0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("transform", format!("cannot parse `{s}`"));
        let (body, scale) = match s.split_once('@') {
            Some((b, sc)) => (b, sc.parse::<f64>().map_err(|_| bad())?),
            None => (s, 1.0),
        };
        let (body, flip) = match body.strip_suffix("-flip") {
            Some(b) => (b, true),
            None => (body, false),
        };
        let rotation = body
            .strip_prefix("rot")
            .and_then(|d| d.parse::<u16>().ok())
            .ok_or_else(bad)?;
        TTATransform::new(rotation, flip, scale)
    }
}

/// Transforms an input image and trimap for one TTA pass.
pub fn tta_forward(image: &ColorMap, trimap: &Trimap, t: &TTATransform) -> Result<(ColorMap, Trimap)> {
    t.validate()?;
    check_dims("image", image.dims(), "trimap", trimap.dims())?;
    let d = t.dihedral();
    let img = d.apply_color(image);
    let tri = d.apply_trimap(trimap);
    if t.scale == 1.0 {
        return Ok((img, tri));
    }
    let (w, h) = img.dims();
    let (sw, sh) = t.scaled_dims(w, h);
    let img = img.map_channels(|p| resize_bilinear(p, sw, sh));
    let labels = nearest_indices(w, h, sw, sh)
        .into_iter()
        .map(|i| tri.labels()[i])
        .collect();
    Ok((img, Trimap::new(sw, sh, labels)))
}

/// Maps a prediction made on transformed inputs back onto the original
/// `target_dims` grid.
pub fn tta_inverse(
    pred: &PredictionSet,
    t: &TTATransform,
    target_dims: (usize, usize),
) -> Result<PredictionSet> {
    t.validate()?;
    let (w, h) = target_dims;
    let d = t.dihedral();
    let (dw, dh) = d.output_dims(w, h);
    if t.scale == 1.0 {
        check_dims("prediction", pred.dims(), "transformed target", (dw, dh))?;
    }
    let pred = if pred.dims() == (dw, dh) {
        pred.clone()
    } else {
        PredictionSet::new(
            resize_bilinear(&pred.alpha, dw, dh),
            pred.fg.map_channels(|p| resize_bilinear(p, dw, dh)),
            pred.bg.map_channels(|p| resize_bilinear(p, dw, dh)),
        )?
    };
    PredictionSet::new(
        d.invert_pixel(&pred.alpha, w, h),
        d.invert_color(&pred.fg, w, h),
        d.invert_color(&pred.bg, w, h),
    )
}

/// Per-pixel mean of predictions already mapped back to a common grid.
pub fn tta_merge(preds: &[PredictionSet]) -> Result<PredictionSet> {
    let first = preds
        .first()
        .ok_or_else(|| Error::invalid("preds", "at least one prediction is required"))?;
    for p in &preds[1..] {
        check_dims("first prediction", first.dims(), "prediction", p.dims())?;
    }
    let n = preds.len() as f64;
    let mean = |get: &dyn Fn(&PredictionSet) -> &[f32]| -> Vec<f32> {
        let len = get(first).len();
        let mut acc = vec![0.0f64; len];
        for p in preds {
            for (a, &v) in acc.iter_mut().zip(get(p)) {
                *a += v as f64;
            }
        }
        acc.into_iter().map(|v| (v / n) as f32).collect()
    };
    let (w, h) = first.dims();
    PredictionSet::new(
        PixelMap::new(w, h, mean(&|p| p.alpha.data())),
        ColorMap::new(w, h, mean(&|p| p.fg.data())),
        ColorMap::new(w, h, mean(&|p| p.bg.data())),
    )
}

// ---------------------------------------------------------------------------
// Layer resampling and second-foreground merge

/// Resamples a foreground/alpha pair through `resample`, weighting colors
/// by alpha. Where the resampled alpha is zero the straight-resampled color
/// is kept.
pub fn resample_layers(
    fg: &ColorMap,
    alpha: &PixelMap,
    resample: impl Fn(&PixelMap) -> PixelMap,
) -> (ColorMap, PixelMap) {
    let a2 = resample(alpha);
    let (w, h) = a2.dims();
    let planes = fg.channels().map(|plane| {
        let pre = PixelMap::new(
            plane.width(),
            plane.height(),
            plane.data().iter().zip(alpha.data()).map(|(f, a)| f * a).collect(),
        );
        let pre2 = resample(&pre);
        let straight = resample(&plane);
        PixelMap::new(
            w,
            h,
            pre2.data()
                .iter()
                .zip(a2.data())
                .zip(straight.data())
                .map(|((&p, &a), &s)| if a > 0.0 { clamp01(p / a) } else { s })
                .collect(),
        )
    });
    (ColorMap::from_planes(planes), a2)
}

/// Places foreground 1 over foreground 2.
pub fn merge_second_fg(
    fg1: &ColorMap,
    alpha1: &PixelMap,
    fg2: &ColorMap,
    alpha2: &PixelMap,
) -> Result<(ColorMap, PixelMap)> {
    let d = alpha1.dims();
    check_dims("alpha1", d, "fg1", fg1.dims())?;
    check_dims("alpha1", d, "fg2", fg2.dims())?;
    check_dims("alpha1", d, "alpha2", alpha2.dims())?;
    let a: Vec<f32> = alpha1
        .data()
        .iter()
        .zip(alpha2.data())
        .map(|(&a1, &a2)| clamp01(a1 + a2 * (1.0 - a1)))
        .collect();
    let mut fg = Vec::with_capacity(3 * a.len());
    for c in 0..3 {
        let (f1, f2) = (fg1.plane(c), fg2.plane(c));
        for (i, &alpha) in a.iter().enumerate() {
            let a1 = alpha1.data()[i];
            let a2 = alpha2.data()[i];
            fg.push(if alpha > 0.0 {
                (a1 * f1[i] + (1.0 - a1) * a2 * f2[i]) / alpha
            } else {
                f1[i]
            });
        }
    }
    Ok((ColorMap::new(d.0, d.1, fg), PixelMap::new(d.0, d.1, a)))
}

// ---------------------------------------------------------------------------
// Sample composition

fn default_second_fg_prob() -> f64 {
    0.5
}

fn default_gamma() -> f64 {
    1.0
}

fn default_min_px() -> u32 {
    crate::trimap::DEFAULT_MIN_PX
}

fn default_max_px() -> u32 {
    crate::trimap::DEFAULT_MAX_PX
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub crop_size: u32,
    #[serde(default)]
    pub flip: bool,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub brightness: f64,
    #[serde(default = "default_second_fg_prob")]
    pub second_fg_prob: f64,
    #[serde(default)]
    pub use_2x: bool,
    pub seed: u64,
    #[serde(default = "default_min_px")]
    pub trimap_min_px: u32,
    #[serde(default = "default_max_px")]
    pub trimap_max_px: u32,
}

impl SampleSpec {
    /// No flip, unit gamma, no brightness shift, no second foreground.
    pub fn identity(crop_size: u32, seed: u64) -> Self {
        Self {
            crop_size,
            flip: false,
            gamma: 1.0,
            brightness: 0.0,
            second_fg_prob: 0.0,
            use_2x: false,
            seed,
            trimap_min_px: default_min_px(),
            trimap_max_px: default_max_px(),
        }
    }

    /// Draws crop size, flip, gamma and brightness from their default ranges.
    pub fn randomized(seed: u64, use_2x: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3e_1e00_0000);
        Self {
            crop_size: CROP_SIZES[rng.random_range(0..CROP_SIZES.len())],
            flip: rng.random_bool(0.5),
            gamma: rng.random_range(GAMMA_RANGE.0..=GAMMA_RANGE.1),
            brightness: rng.random_range(BRIGHTNESS_RANGE.0..=BRIGHTNESS_RANGE.1),
            second_fg_prob: 0.5,
            use_2x,
            seed,
            trimap_min_px: default_min_px(),
            trimap_max_px: default_max_px(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !CROP_SIZES.contains(&self.crop_size) {
            return Err(Error::invalid(
                "crop_size",
                format!("{} is not one of {CROP_SIZES:?}", self.crop_size),
            ));
        }
        if !(GAMMA_RANGE.0..=GAMMA_RANGE.1).contains(&self.gamma) {
            return Err(Error::invalid("gamma", format!("must lie in {GAMMA_RANGE:?}")));
        }
        if !(BRIGHTNESS_RANGE.0..=BRIGHTNESS_RANGE.1).contains(&self.brightness) {
            return Err(Error::invalid(
                "brightness",
                format!("must lie in {BRIGHTNESS_RANGE:?}"),
            ));
        }
        if !(0.0..=1.0).contains(&self.second_fg_prob) {
            return Err(Error::invalid("second_fg_prob", "must lie in [0, 1]"));
        }
        if self.trimap_min_px < 1 || self.trimap_min_px > self.trimap_max_px {
            return Err(Error::invalid("trimap_min_px", "need 1 <= min_px <= max_px"));
        }
        Ok(())
    }
}

/// Source layers for [`make_sample`].
#[derive(Debug, Clone, Copy)]
pub struct SampleInputs<'a> {
    pub fg: &'a ColorMap,
    pub alpha: &'a PixelMap,
    pub bg: &'a ColorMap,
    /// Optional second foreground; when absent the merge uses a vertically
    /// mirrored copy of the first.
    pub second: Option<(&'a ColorMap, &'a PixelMap)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub crop_origin: (usize, usize),
    pub bg_origin: (usize, usize),
    pub trimap_radii: (u32, u32),
    pub second_fg: bool,
    pub rng: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: ColorMap,
    pub gt: PredictionSet,
    pub trimap: Trimap,
    pub meta: SampleMeta,
}

fn crop_color(m: &ColorMap, x0: usize, y0: usize, size: usize) -> ColorMap {
    ColorMap::from_fn(size, size, |c, x, y| m.get(c, x0 + x, y0 + y))
}

fn crop_pixel(m: &PixelMap, x0: usize, y0: usize, size: usize) -> PixelMap {
    PixelMap::from_fn(size, size, |x, y| m.get(x0 + x, y0 + y))
}

fn crop_trimap(t: &Trimap, x0: usize, y0: usize, size: usize) -> Trimap {
    let mut labels = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            labels.push(t.get(x0 + x, y0 + y));
        }
    }
    Trimap::new(size, size, labels)
}

/// Horizontal mirror followed by a half turn.
const VERTICAL_MIRROR: Dihedral = Dihedral {
    quarter_turns: 2,
    flip: true,
};

/// Builds one training sample: optional second-foreground merge, optional
/// 2× upscale, optional mirror, trimap generation, a crop centered on an
/// Unknown pixel, compositing, then gamma and brightness on the image.
pub fn make_sample(inputs: SampleInputs<'_>, spec: &SampleSpec) -> Result<Sample> {
    spec.validate()?;
    let SampleInputs {
        fg,
        alpha,
        bg,
        second,
    } = inputs;
    check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let use_second = spec.second_fg_prob > 0.0 && rng.random::<f64>() < spec.second_fg_prob;
    let trimap_seed: u64 = rng.random();

    let (mut fg, mut alpha) = (fg.clone(), alpha.clone());
    if use_second {
        let (w, h) = alpha.dims();
        let (f2, a2) = match second {
            Some((f2, a2)) => {
                check_dims("second alpha", a2.dims(), "second fg", f2.dims())?;
                resample_layers(f2, a2, |p| resize_bilinear(p, w, h))
            }
            None => {
                (VERTICAL_MIRROR.apply_color(&fg), VERTICAL_MIRROR.apply_pixel(&alpha))
            }
        };
        (fg, alpha) = merge_second_fg(&fg, &alpha, &f2, &a2)?;
    }

    let mut bg = bg.clone();
    if spec.use_2x {
        let (w, h) = alpha.dims();
        (fg, alpha) = resample_layers(&fg, &alpha, |p| resize_bilinear(p, 2 * w, 2 * h));
        let (bw, bh) = bg.dims();
        bg = bg.map_channels(|p| resize_bilinear(p, 2 * bw, 2 * bh));
    }
    if spec.flip {
        let d = Dihedral {
            quarter_turns: 0,
            flip: true,
        };
        fg = d.apply_color(&fg);
        alpha = d.apply_pixel(&alpha);
        bg = d.apply_color(&bg);
    }

    let size = spec.crop_size as usize;
    let (w, h) = alpha.dims();
    if w < size || h < size {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            reason: format!("foreground frame is smaller than the {size}px crop"),
        });
    }
    let (bw, bh) = bg.dims();
    if bw < size || bh < size {
        return Err(Error::TooSmall {
            width: bw,
            height: bh,
            reason: format!("background is smaller than the {size}px crop"),
        });
    }

    let (rf, rb) = draw_radii(spec.trimap_min_px, spec.trimap_max_px, trimap_seed)?;
    let trimap = trimap_with_radii(&alpha, rf, rb, BorderPolicy::default());
    let unknown: Vec<usize> = trimap
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == Label::Unknown)
        .map(|(i, _)| i)
        .collect();
    if unknown.is_empty() {
        return Err(Error::NoUnknownPixel);
    }
    let center = unknown[rng.random_range(0..unknown.len())];
    let (cx, cy) = (center % w, center / w);
    let x0 = cx.saturating_sub(size / 2).min(w - size);
    let y0 = cy.saturating_sub(size / 2).min(h - size);
    let bx = rng.random_range(0..=bw - size);
    let by = rng.random_range(0..=bh - size);

    let fg = crop_color(&fg, x0, y0, size);
    let alpha = crop_pixel(&alpha, x0, y0, size);
    let bg = crop_color(&bg, bx, by, size);
    let trimap = crop_trimap(&trimap, x0, y0, size);

    let gamma = spec.gamma as f32;
    let brightness = spec.brightness as f32;
    let image = composite(&alpha, &fg, &bg)?.map(|v| clamp01(v.powf(gamma) + brightness));

    Ok(Sample {
        image,
        gt: PredictionSet::new(alpha, fg, bg)?,
        trimap,
        meta: SampleMeta {
            crop_origin: (x0, y0),
            bg_origin: (bx, by),
            trimap_radii: (rf, rb),
            second_fg: use_second,
            rng: crate::trimap::RNG_ALGORITHM.to_string(),
        },
    })
}
