//! The colour-spill fixture: a foreground whose undefined (α = 0) pixels
//! hold an arbitrary sentinel color, upscaled 2× on the way to a sample.

#![allow(dead_code)]

use fba_core::augment::{make_sample, SampleInputs, SampleSpec};
use fba_core::filter::resize_bilinear;
use fba_core::{composite, ColorMap, PixelMap};

pub const SIZE: usize = 160;
pub const SENTINELS: [[f32; 3]; 2] = [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];

/// Hard-edged disk with a one-pixel soft rim over a gray background.
pub fn layers(sentinel: [f32; 3]) -> (ColorMap, PixelMap, ColorMap) {
    let c = SIZE as f64 / 2.0;
    let alpha = PixelMap::from_fn(SIZE, SIZE, |x, y| {
        let d = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
        (40.5 - d).clamp(0.0, 1.0) as f32
    });
    let fg = ColorMap::from_fn(SIZE, SIZE, |ch, x, y| {
        if alpha.get(x, y) > 0.0 {
            [0.2, 0.5, 0.8][ch]
        } else {
            sentinel[ch]
        }
    });
    let bg = ColorMap::from_fn(2 * SIZE, 2 * SIZE, |ch, x, y| {
        0.3 + 0.1 * ch as f32 + 0.2 * ((x + y) % 7) as f32 / 7.0
    });
    (fg, alpha, bg)
}

pub fn spec() -> SampleSpec {
    SampleSpec {
        use_2x: true,
        ..SampleSpec::identity(320, 7)
    }
}

/// Image produced by the sample pipeline: layers are resampled, then
/// composited.
pub fn pipeline(sentinel: [f32; 3]) -> (ColorMap, (usize, usize), (usize, usize)) {
    let (fg, alpha, bg) = layers(sentinel);
    let s = make_sample(
        SampleInputs {
            fg: &fg,
            alpha: &alpha,
            bg: &bg,
            second: None,
        },
        &spec(),
    )
    .unwrap();
    (s.image, s.meta.crop_origin, s.meta.bg_origin)
}

fn crop(m: &ColorMap, x0: usize, y0: usize, n: usize) -> ColorMap {
    ColorMap::from_fn(n, n, |c, x, y| m.get(c, x0 + x, y0 + y))
}

/// Straight-alpha bilinear upscaling of F and α, then compositing over the
/// same background window as [`pipeline`]. The upscaled frame equals the
/// crop, so no foreground crop is needed.
pub fn naive(sentinel: [f32; 3], bg_origin: (usize, usize)) -> ColorMap {
    let (fg, alpha, bg) = layers(sentinel);
    let n = 2 * SIZE;
    let a2 = resize_bilinear(&alpha, n, n);
    let f2 = fg.map_channels(|p| resize_bilinear(p, n, n));
    let bg2 = bg.map_channels(|p| resize_bilinear(p, 2 * bg.width(), 2 * bg.height()));
    composite(&a2, &f2, &crop(&bg2, bg_origin.0, bg_origin.1, n)).unwrap()
}

/// Upscales an already composited image; the sentinel is multiplied by
/// α = 0 before any resampling happens.
pub fn composite_then_resize(sentinel: [f32; 3], bg_origin: (usize, usize)) -> ColorMap {
    let (fg, alpha, bg) = layers(sentinel);
    let bg_small = crop(&bg, bg_origin.0 / 2, bg_origin.1 / 2, SIZE);
    let image = composite(&alpha, &fg, &bg_small).unwrap();
    image.map_channels(|p| resize_bilinear(p, 2 * SIZE, 2 * SIZE))
}

pub fn contamination(a: &ColorMap, b: &ColorMap) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() as f64)
        .fold(0.0, f64::max)
}
