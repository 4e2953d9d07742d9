//! Trimaps: generation from ground-truth mattes, the six-channel blurred
//! encoding fed to the network next to the RGB image, and the 0/128/255
//! PNG file format.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::filter::{gaussian_kernel, separable, Border};
use crate::maps::PixelMap;

/// Identifier of the generator behind every seeded draw in this crate.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9, seed_from_u64)";

pub const DEFAULT_SIGMAS: [f64; 3] = [2.0, 8.0, 16.0];
pub const DEFAULT_MIN_PX: u32 = 3;
pub const DEFAULT_MAX_PX: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Background,
    Unknown,
    Foreground,
}

impl Label {
    pub fn to_byte(self) -> u8 {
        match self {
            Label::Background => 0,
            Label::Unknown => 128,
            Label::Foreground => 255,
        }
    }

    pub fn from_byte(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Background),
            128 => Some(Label::Unknown),
            255 => Some(Label::Foreground),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trimap {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl Trimap {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Self {
        assert_eq!(labels.len(), width * height, "trimap length must equal width * height");
        Self {
            width,
            height,
            labels,
        }
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        Self::new(width, height, vec![label; width * height])
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

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Binary map of pixels carrying `label`.
    pub fn mask(&self, label: Label) -> PixelMap {
        PixelMap::new(
            self.width,
            self.height,
            self.labels
                .iter()
                .map(|&l| if l == label { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

/// How pixels beyond the image edge are treated during erosion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderPolicy {
    /// The outside belongs to no region; regions erode away from the edge.
    #[default]
    Outside,
    /// The outside belongs to every region; the edge never erodes.
    Inside,
}

/// 1-D squared Euclidean distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let first = match f.iter().position(|v| v.is_finite()) {
        Some(i) => i,
        None => {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance from every pixel to the nearest pixel outside `region`.
fn distance_to_complement(
    region: &[bool],
    width: usize,
    height: usize,
    border: BorderPolicy,
) -> Vec<f64> {
    // one-pixel frame carrying the border policy
    let (pw, ph) = (width + 2, height + 2);
    let frame_in = border == BorderPolicy::Inside;
    let mut grid = vec![0.0f64; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let inside = if x == 0 || y == 0 || x == pw - 1 || y == ph - 1 {
                frame_in
            } else {
                region[(y - 1) * width + (x - 1)]
            };
            grid[y * pw + x] = if inside { f64::INFINITY } else { 0.0 };
        }
    }
    let mut col = vec![0.0; ph];
    let mut col_out = vec![0.0; ph];
    for x in 0..pw {
        for y in 0..ph {
            col[y] = grid[y * pw + x];
        }
        edt_1d(&col, &mut col_out);
        for y in 0..ph {
            grid[y * pw + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; pw];
    for y in 0..ph {
        edt_1d(&grid[y * pw..(y + 1) * pw], &mut row_out);
        grid[y * pw..(y + 1) * pw].copy_from_slice(&row_out);
    }
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        out.extend_from_slice(&grid[(y + 1) * pw + 1..(y + 1) * pw + 1 + width]);
    }
    out
}

/// Erosion of `region` by a Euclidean disk of `radius` pixels.
pub fn erode_disk(
    region: &[bool],
    width: usize,
    height: usize,
    radius: u32,
    border: BorderPolicy,
) -> Vec<bool> {
    let r2 = (radius as f64) * (radius as f64);
    distance_to_complement(region, width, height, border)
        .into_iter()
        .zip(region)
        .map(|(d, &inside)| inside && d > r2)
        .collect()
}

/// Dilation of `region` by a Euclidean disk of `radius` pixels.
pub fn dilate_disk(
    region: &[bool],
    width: usize,
    height: usize,
    radius: u32,
    border: BorderPolicy,
) -> Vec<bool> {
    let flipped = match border {
        BorderPolicy::Outside => BorderPolicy::Inside,
        BorderPolicy::Inside => BorderPolicy::Outside,
    };
    let complement: Vec<bool> = region.iter().map(|&v| !v).collect();
    erode_disk(&complement, width, height, radius, flipped)
        .into_iter()
        .map(|v| !v)
        .collect()
}

/// Draws the foreground and background erosion radii for `seed`.
pub fn draw_radii(min_px: u32, max_px: u32, seed: u64) -> Result<(u32, u32)> {
    check_radius_range(min_px, max_px)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fg = rng.random_range(min_px..=max_px);
    let bg = rng.random_range(min_px..=max_px);
    Ok((fg, bg))
}

fn check_radius_range(min_px: u32, max_px: u32) -> Result<()> {
    if min_px < 1 {
        return Err(Error::invalid("min_px", "must be at least 1"));
    }
    if min_px > max_px {
        return Err(Error::invalid(
            "min_px",
            format!("min_px ({min_px}) exceeds max_px ({max_px})"),
        ));
    }
    Ok(())
}

/// Trimap with explicit erosion radii for the `α = 1` and `α = 0` regions.
pub fn trimap_with_radii(
    gt_alpha: &PixelMap,
    fg_radius: u32,
    bg_radius: u32,
    border: BorderPolicy,
) -> Trimap {
    let (w, h) = gt_alpha.dims();
    let fg: Vec<bool> = gt_alpha.data().iter().map(|&a| a >= 1.0).collect();
    let bg: Vec<bool> = gt_alpha.data().iter().map(|&a| a <= 0.0).collect();
    let fg = erode_disk(&fg, w, h, fg_radius, border);
    let bg = erode_disk(&bg, w, h, bg_radius, border);
    let labels = fg
        .iter()
        .zip(&bg)
        .map(|(&f, &b)| match (f, b) {
            (true, _) => Label::Foreground,
            (false, true) => Label::Background,
            _ => Label::Unknown,
        })
        .collect();
    Trimap::new(w, h, labels)
}

/// Random trimap: both definite regions eroded by independent radii drawn
/// uniformly from `[min_px, max_px]`.
pub fn generate_trimap(gt_alpha: &PixelMap, min_px: u32, max_px: u32, seed: u64) -> Result<Trimap> {
    generate_trimap_with(gt_alpha, min_px, max_px, seed, BorderPolicy::default()).map(|(t, _)| t)
}

/// As [`generate_trimap`], also returning the drawn `(fg, bg)` radii.
pub fn generate_trimap_with(
    gt_alpha: &PixelMap,
    min_px: u32,
    max_px: u32,
    seed: u64,
    border: BorderPolicy,
) -> Result<(Trimap, (u32, u32))> {
    let (rf, rb) = draw_radii(min_px, max_px, seed)?;
    Ok((trimap_with_radii(gt_alpha, rf, rb, border), (rf, rb)))
}

/// Foreground and background masks, each blurred at three scales.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimapEncoding {
    /// `fg@σ1, fg@σ2, fg@σ3, bg@σ1, bg@σ2, bg@σ3`.
    pub channels: [PixelMap; 6],
    pub sigmas: [f64; 3],
}

pub fn encode_trimap(trimap: &Trimap, sigmas: [f64; 3]) -> Result<TrimapEncoding> {
    if !sigmas.iter().all(|&s| s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("sigmas", "every sigma must be positive"));
    }
    if !(sigmas[0] < sigmas[1] && sigmas[1] < sigmas[2]) {
        return Err(Error::invalid("sigmas", "sigmas must be strictly increasing"));
    }
    let fg = trimap.mask(Label::Foreground);
    let bg = trimap.mask(Label::Background);
    let blur = |m: &PixelMap, s: f64| {
        let k = gaussian_kernel(s);
        separable(m, &k, &k, Border::Reflect)
    };
    let channels = [
        blur(&fg, sigmas[0]),
        blur(&fg, sigmas[1]),
        blur(&fg, sigmas[2]),
        blur(&bg, sigmas[0]),
        blur(&bg, sigmas[1]),
        blur(&bg, sigmas[2]),
    ];
    Ok(TrimapEncoding { channels, sigmas })
}

/// Reads an 8-bit grayscale PNG with values in {0, 128, 255}.
pub fn trimap_from_file(path: impl AsRef<Path>) -> Result<Trimap> {
    let path = path.as_ref();
    let img = crate::io::png::open(path)?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(Error::format(
                path,
                format!("trimap must be 8-bit grayscale, found {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let mut labels = Vec::with_capacity(w * h);
    for (i, &v) in gray.as_raw().iter().enumerate() {
        match Label::from_byte(v) {
            Some(l) => labels.push(l),
            None => {
                return Err(Error::format(
                    path,
                    format!("trimap value {v} at pixel ({}, {}) is not 0, 128 or 255", i % w, i / w),
                ))
            }
        }
    }
    Ok(Trimap::new(w, h, labels))
}

pub fn trimap_to_file(trimap: &Trimap, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = trimap.labels.iter().map(|l| l.to_byte()).collect();
    let img = image::GrayImage::from_raw(trimap.width as u32, trimap.height as u32, bytes)
        .expect("buffer length matches dimensions");
    crate::io::png::save(path.as_ref(), &image::DynamicImage::ImageLuma8(img))
}

/// Checks that a trimap and a map share dimensions.
pub fn check_trimap(trimap: &Trimap, dims: (usize, usize)) -> Result<()> {
    check_dims("trimap", trimap.dims(), "map", dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edt_matches_brute_force() {
        let w = 11;
        let h = 7;
        let region: Vec<bool> = (0..w * h).map(|i| (i * 37 + i / 3) % 5 != 0).collect();
        for border in [BorderPolicy::Outside, BorderPolicy::Inside] {
            let d = distance_to_complement(&region, w, h, border);
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let mut best = f64::INFINITY;
                    for qy in -1..=h as isize {
                        for qx in -1..=w as isize {
                            let outside_img = qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize;
                            let in_region = if outside_img {
                                border == BorderPolicy::Inside
                            } else {
                                region[qy as usize * w + qx as usize]
                            };
                            if !in_region {
                                let dd = ((qx - x).pow(2) + (qy - y).pow(2)) as f64;
                                best = best.min(dd);
                            }
                        }
                    }
                    assert_eq!(d[y as usize * w + x as usize], best, "({x},{y}) {border:?}");
                }
            }
        }
    }

    #[test]
    fn opaque_matte_with_inside_border_is_all_foreground() {
        let a = PixelMap::filled(10, 10, 1.0);
        let t = trimap_with_radii(&a, 3, 3, BorderPolicy::Inside);
        assert_eq!(t.count(Label::Foreground), 100);
        let t = trimap_with_radii(&a, 3, 3, BorderPolicy::Outside);
        assert_eq!(t.count(Label::Foreground), 16);
        assert_eq!(t.count(Label::Background), 0);
    }

    #[test]
    fn radius_range_is_validated() {
        let a = PixelMap::zeros(4, 4);
        assert!(generate_trimap(&a, 5, 3, 0).is_err());
        assert!(generate_trimap(&a, 0, 3, 0).is_err());
        let (rf, rb) = draw_radii(3, 25, 42).unwrap();
        assert!((3..=25).contains(&rf) && (3..=25).contains(&rb));
    }

    #[test]
    fn dilation_is_complement_erosion() {
        let mut region = vec![false; 81];
        region[40] = true;
        let d = dilate_disk(&region, 9, 9, 2, BorderPolicy::Outside);
        assert_eq!(d.iter().filter(|&&v| v).count(), 13);
    }

    #[test]
    fn encoding_rejects_unordered_sigmas() {
        let t = Trimap::filled(4, 4, Label::Unknown);
        assert!(encode_trimap(&t, [2.0, 2.0, 3.0]).is_err());
        assert!(encode_trimap(&t, [0.0, 2.0, 3.0]).is_err());
        let e = encode_trimap(&t, DEFAULT_SIGMAS).unwrap();
        assert!(e.channels.iter().all(|c| c.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn encoding_of_full_foreground_is_one() {
        let t = Trimap::filled(9, 6, Label::Foreground);
        let e = encode_trimap(&t, [1.0, 3.0, 5.0]).unwrap();
        for ch in &e.channels[..3] {
            assert!(ch.data().iter().all(|&v| (v - 1.0).abs() < 1e-6));
        }
    }
}
