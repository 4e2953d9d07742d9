//! Maximum-likelihood fusion of predicted alpha, foreground and background
//! with the observed image.
//!
//! With Gaussian priors around each prediction and a Gaussian reconstruction
//! likelihood, one block sweep at every pixel is
//!
//! ```text
//! r      = C − α⁽ⁿ⁾F⁽ⁿ⁾ − (1 − α⁽ⁿ⁾)B⁽ⁿ⁾
//! F⁽ⁿ⁺¹⁾ = F̂ + (σ²_FB / σ²_C) · α⁽ⁿ⁾ · r
//! B⁽ⁿ⁺¹⁾ = B̂ + (σ²_FB / σ²_C) · (1 − α⁽ⁿ⁾) · r
//! α⁽ⁿ⁺¹⁾ = (α⁽ⁿ⁾ + k (C − B⁽ⁿ⁺¹⁾)·(F⁽ⁿ⁺¹⁾ − B⁽ⁿ⁺¹⁾))
//!        / (1 + k (F⁽ⁿ⁺¹⁾ − B⁽ⁿ⁺¹⁾)·(F⁽ⁿ⁺¹⁾ − B⁽ⁿ⁺¹⁾)),   k = σ²_α / σ²_C
//! ```
//!
//! where `F̂, B̂` are the original predictions and the dot products run over
//! the three color channels of the pixel. The α denominator is at least 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::maps::{ColorMap, PixelMap, PredictionSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    pub sigma_alpha_sq: f64,
    pub sigma_fb_sq: f64,
    pub sigma_c_sq: f64,
    pub iterations: usize,
    /// Clamp α, F and B to `[0, 1]` after every sweep.
    #[serde(default = "default_clamp")]
    pub clamp: bool,
}

fn default_clamp() -> bool {
    true
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            sigma_alpha_sq: 10.0,
            sigma_fb_sq: 1.0,
            sigma_c_sq: 1.0,
            iterations: 1,
            clamp: true,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_alpha_sq", self.sigma_alpha_sq),
            ("sigma_fb_sq", self.sigma_fb_sq),
            ("sigma_c_sq", self.sigma_c_sq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("variance must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One pixel's state during the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelState {
    pub alpha: f64,
    pub fg: [f64; 3],
    pub bg: [f64; 3],
}

/// Runs `params.iterations` sweeps at a single pixel.
pub fn fuse_pixel(initial: PixelState, image: [f64; 3], params: &FusionParams) -> PixelState {
    let k_fb = params.sigma_fb_sq / params.sigma_c_sq;
    let k_a = params.sigma_alpha_sq / params.sigma_c_sq;
    let mut s = initial;
    for _ in 0..params.iterations {
        let a = s.alpha;
        let mut fg = [0.0; 3];
        let mut bg = [0.0; 3];
        for c in 0..3 {
            let r = image[c] - a * s.fg[c] - (1.0 - a) * s.bg[c];
            fg[c] = initial.fg[c] + k_fb * a * r;
            bg[c] = initial.bg[c] + k_fb * (1.0 - a) * r;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for c in 0..3 {
            let d = fg[c] - bg[c];
            num += (image[c] - bg[c]) * d;
            den += d * d;
        }
        let denom = 1.0 + k_a * den;
        debug_assert!(denom >= 1.0);
        let mut alpha = (a + k_a * num) / denom;
        if params.clamp {
            alpha = alpha.clamp(0.0, 1.0);
            fg.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            bg.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        s = PixelState { alpha, fg, bg };
    }
    s
}

/// Fuses a prediction set with the observed image. Zero iterations return
/// the input unchanged.
pub fn fuse(pred: &PredictionSet, image: &ColorMap, params: &FusionParams) -> Result<PredictionSet> {
    params.validate()?;
    check_dims("prediction", pred.dims(), "image", image.dims())?;
    if params.iterations == 0 {
        return Ok(pred.clone());
    }
    let (w, h) = pred.dims();
    let n = w * h;
    let states: Vec<PixelState> = (0..n)
        .into_par_iter()
        .map(|i| {
            let init = PixelState {
                alpha: pred.alpha.data()[i] as f64,
                fg: [0, 1, 2].map(|c| pred.fg.plane(c)[i] as f64),
                bg: [0, 1, 2].map(|c| pred.bg.plane(c)[i] as f64),
            };
            let img = [0, 1, 2].map(|c| image.plane(c)[i] as f64);
            fuse_pixel(init, img, params)
        })
        .collect();
    let alpha = PixelMap::new(w, h, states.iter().map(|s| s.alpha as f32).collect());
    let mut fg = vec![0.0f32; 3 * n];
    let mut bg = vec![0.0f32; 3 * n];
    for (i, s) in states.iter().enumerate() {
        for c in 0..3 {
            fg[c * n + i] = s.fg[c] as f32;
            bg[c * n + i] = s.bg[c] as f32;
        }
    }
    PredictionSet::new(alpha, ColorMap::new(w, h, fg), ColorMap::new(w, h, bg))
}

/// `Σ ‖C − α̂F̂ − (1 − α̂)B̂‖²` over the image.
pub fn composite_residual(pred: &PredictionSet, image: &ColorMap) -> Result<f64> {
    check_dims("prediction", pred.dims(), "image", image.dims())?;
    let a = pred.alpha.data();
    let mut acc = 0.0f64;
    for (i, &alpha) in a.iter().enumerate() {
        let alpha = alpha as f64;
        for c in 0..3 {
            let r = image.plane(c)[i] as f64
                - alpha * pred.fg.plane(c)[i] as f64
                - (1.0 - alpha) * pred.bg.plane(c)[i] as f64;
            acc += r * r;
        }
    }
    Ok(acc)
}
