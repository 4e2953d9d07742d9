//! Seeded random inputs shared by the integration and acceptance tests.

#![allow(dead_code)]

use fba_core::{composite, ColorMap, EvalMask, PixelMap, PredictionSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pixel(rng: &mut TestRng, w: usize, h: usize) -> PixelMap {
    PixelMap::from_fn(w, h, |_, _| rng.random::<f32>())
}

pub fn color(rng: &mut TestRng, w: usize, h: usize) -> ColorMap {
    ColorMap::from_fn(w, h, |_, _, _| rng.random::<f32>())
}

pub fn mask(rng: &mut TestRng, w: usize, h: usize, p: f64) -> EvalMask {
    EvalMask::from_fn(w, h, |_, _| rng.random_bool(p))
}

/// A matte with solid 0 and 1 regions and a soft band: a disk of random
/// center and radius with a linear falloff.
pub fn soft_disk(rng: &mut TestRng, w: usize, h: usize) -> PixelMap {
    let cx = rng.random_range(0.3..0.7) * w as f64;
    let cy = rng.random_range(0.3..0.7) * h as f64;
    let r = rng.random_range(0.2..0.35) * w.min(h) as f64;
    let band = rng.random_range(1.5..4.0);
    PixelMap::from_fn(w, h, |x, y| {
        let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
        ((r + band - d) / (2.0 * band)).clamp(0.0, 1.0) as f32
    })
}

/// Low-frequency color layer: a random affine ramp plus one sinusoid.
pub fn smooth_color(rng: &mut TestRng, w: usize, h: usize) -> ColorMap {
    let p: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.random_range(0.2..0.8),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(0.0..0.1),
                rng.random_range(0.5..2.0),
            ]
        })
        .collect();
    ColorMap::from_fn(w, h, |c, x, y| {
        let [base, gx, gy, amp, freq] = p[c];
        let u = x as f64 / w as f64;
        let v = y as f64 / h as f64;
        let s = (freq * std::f64::consts::PI * (u + v)).sin();
        (base + gx * (u - 0.5) + gy * (v - 0.5) + amp * s).clamp(0.0, 1.0) as f32
    })
}

/// Random consistent triple and its composite.
pub fn consistent(rng: &mut TestRng, w: usize, h: usize) -> (PredictionSet, ColorMap) {
    let alpha = pixel(rng, w, h);
    let fg = color(rng, w, h);
    let bg = color(rng, w, h);
    let image = composite(&alpha, &fg, &bg).unwrap();
    (PredictionSet::new(alpha, fg, bg).unwrap(), image)
}

/// A matte pair for connectivity tests: both share a solid block, and
/// each has random soft values, holes and detached blobs elsewhere.
pub fn matte_pair(rng: &mut TestRng, w: usize, h: usize) -> (PixelMap, PixelMap) {
    let (bx, by) = (rng.random_range(0..w / 2), rng.random_range(0..h / 2));
    let make = |rng: &mut TestRng| {
        PixelMap::from_fn(w, h, |x, y| {
            if (bx..bx + 4).contains(&x) && (by..by + 4).contains(&y) {
                return 1.0;
            }
            match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f32>(),
            }
        })
    };
    let a = make(rng);
    let b = make(rng);
    (a, b)
}

pub fn max_abs_diff(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x as f64 - *y as f64).abs())
        .fold(0.0, f64::max)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12) || (a - b).abs() <= tol
}
