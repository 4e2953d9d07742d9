//! Training losses over prediction / ground-truth pairs.
//!
//! Every loss is a plain sum over the selected pixels. Per-pixel terms are
//! formed in `f32` (the storage precision) and accumulated in `f64` in
//! row-major order, channel by channel.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::maps::{ColorMap, PixelMap, PredictionSet};
use crate::pyramid::{build_pyramid, LaplacianPyramid};
use crate::trimap::{Label, Trimap};

/// Number of pyramid levels summed by the Laplacian losses.
pub const LAPLACIAN_LEVELS: usize = 5;

/// Weight of the four foreground/background terms in the combined loss.
pub const FB_WEIGHT: f64 = 0.25;

/// Binary selection of pixels contributing to a sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EvalMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), width * height, "mask length must equal width * height");
        Self {
            width,
            height,
            data,
        }
    }

    /// Every pixel selected.
    pub fn full(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// The trimap's Unknown band.
    pub fn unknown(trimap: &Trimap) -> Self {
        let (w, h) = trimap.dims();
        Self::new(
            w,
            h,
            trimap.labels().iter().map(|&l| l == Label::Unknown).collect(),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Pixels selected by `self` but not by `other`.
    pub fn difference(&self, other: &EvalMask) -> EvalMask {
        EvalMask::new(
            self.width,
            self.height,
            self.data.iter().zip(&other.data).map(|(&a, &b)| a && !b).collect(),
        )
    }
}

/// Discrete spatial gradient used by the gradient and exclusion losses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientOperator {
    /// `x[i+1] - x[i]` with replicated borders (zero at the last row/column).
    #[default]
    Forward,
    /// 3×3 Sobel with replicated borders.
    Sobel,
}

impl GradientOperator {
    /// `(d/dx, d/dy)` of `map`.
    pub fn apply(self, map: &PixelMap) -> (PixelMap, PixelMap) {
        let (w, h) = map.dims();
        let at = |x: isize, y: isize| {
            let xi = x.clamp(0, w as isize - 1) as usize;
            let yi = y.clamp(0, h as isize - 1) as usize;
            map.get(xi, yi)
        };
        match self {
            GradientOperator::Forward => (
                PixelMap::from_fn(w, h, |x, y| {
                    at(x as isize + 1, y as isize) - at(x as isize, y as isize)
                }),
                PixelMap::from_fn(w, h, |x, y| {
                    at(x as isize, y as isize + 1) - at(x as isize, y as isize)
                }),
            ),
            GradientOperator::Sobel => {
                let gx = PixelMap::from_fn(w, h, |x, y| {
                    let (x, y) = (x as isize, y as isize);
                    (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                        - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1))
                });
                let gy = PixelMap::from_fn(w, h, |x, y| {
                    let (x, y) = (x as isize, y as isize);
                    (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                        - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1))
                });
                (gx, gy)
            }
        }
    }
}

/// How a loss is reduced over pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Sum,
    /// Sum divided by the number of contributing pixels.
    Mean,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossConfig {
    pub gradient: GradientOperator,
    pub reduction: Reduction,
}

/// The eight loss terms and their weighted total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l1_alpha: f64,
    pub comp_alpha: f64,
    pub grad_alpha: f64,
    pub lap_alpha: f64,
    pub l1_fb: f64,
    pub lap_fb: f64,
    pub comp_fb: f64,
    pub excl_fb: f64,
    pub total: f64,
}

impl LossReport {
    /// Fills `total` from the eight terms.
    pub fn with_total(mut self) -> Self {
        self.total = self.l1_alpha
            + self.comp_alpha
            + self.grad_alpha
            + self.lap_alpha
            + FB_WEIGHT * (self.l1_fb + self.lap_fb + self.excl_fb + self.comp_fb);
        self
    }
}

fn check_mask(what: &'static str, dims: (usize, usize), mask: &EvalMask) -> Result<()> {
    check_dims(what, dims, "mask", mask.dims())
}

fn masked_abs_sum(a: &[f32], b: &[f32], mask: &EvalMask) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|((&p, &g), _)| (p - g).abs() as f64)
        .sum()
}

/// `Σ |α̂ − α|` over the mask.
pub fn l1_alpha(pred: &PixelMap, gt: &PixelMap, mask: &EvalMask) -> Result<f64> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    check_mask("pred", pred.dims(), mask)?;
    Ok(masked_abs_sum(pred.data(), gt.data(), mask))
}

/// Sum over channels and masked pixels of `|C − a·F − (1 − a)·B|`.
fn reconstruction_l1(
    alpha: &PixelMap,
    fg: &ColorMap,
    bg: &ColorMap,
    image: &ColorMap,
    mask: &EvalMask,
) -> f64 {
    let mut acc = 0.0f64;
    for c in 0..3 {
        let (f, b, i) = (fg.plane(c), bg.plane(c), image.plane(c));
        for (k, &a) in alpha.data().iter().enumerate() {
            if mask.data()[k] {
                acc += (i[k] - (a * f[k] + (1.0 - a) * b[k])).abs() as f64;
            }
        }
    }
    acc
}

/// Compositional loss on predicted alpha with ground-truth layers.
pub fn composition_loss_alpha(
    pred_alpha: &PixelMap,
    gt_fg: &ColorMap,
    gt_bg: &ColorMap,
    image: &ColorMap,
    mask: &EvalMask,
) -> Result<f64> {
    let d = pred_alpha.dims();
    check_dims("pred_alpha", d, "gt_fg", gt_fg.dims())?;
    check_dims("pred_alpha", d, "gt_bg", gt_bg.dims())?;
    check_dims("pred_alpha", d, "image", image.dims())?;
    check_mask("pred_alpha", d, mask)?;
    Ok(reconstruction_l1(pred_alpha, gt_fg, gt_bg, image, mask))
}

/// `Σ |∂x(α̂ − α)| + |∂y(α̂ − α)|` over the mask.
pub fn gradient_loss_alpha(
    pred: &PixelMap,
    gt: &PixelMap,
    mask: &EvalMask,
    op: GradientOperator,
) -> Result<f64> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    check_mask("pred", pred.dims(), mask)?;
    let (px, py) = op.apply(pred);
    let (gx, gy) = op.apply(gt);
    let mut acc = 0.0f64;
    for k in 0..pred.len() {
        if mask.data()[k] {
            acc += (px.data()[k] - gx.data()[k]).abs() as f64;
            acc += (py.data()[k] - gy.data()[k]).abs() as f64;
        }
    }
    Ok(acc)
}

/// `Σ_s 2^{s-1} ‖a_s − b_s‖₁` over the band-pass levels of two pyramids.
/// Residuals do not contribute.
pub fn weighted_band_l1(a: &LaplacianPyramid, b: &LaplacianPyramid) -> Result<f64> {
    if a.depth() != b.depth() {
        return Err(Error::invalid("pyramid", "depths differ"));
    }
    let mut total = 0.0f64;
    for (s, (la, lb)) in a.levels().iter().zip(b.levels()).enumerate() {
        check_dims("level", la.dims(), "level", lb.dims())?;
        let l1: f64 = la
            .data()
            .iter()
            .zip(lb.data())
            .map(|(x, y)| (x - y).abs() as f64)
            .sum();
        total += (1u64 << s) as f64 * l1;
    }
    Ok(total)
}

/// `Σ_{s=1}^{5} 2^{s-1} ‖L^s(pred) − L^s(gt)‖₁` over the full image.
pub fn laplacian_loss(pred: &PixelMap, gt: &PixelMap) -> Result<f64> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    let pp = build_pyramid(pred, LAPLACIAN_LEVELS)?;
    let gp = build_pyramid(gt, LAPLACIAN_LEVELS)?;
    weighted_band_l1(&pp, &gp)
}

/// Per-channel Laplacian loss summed over the three channels.
pub fn laplacian_loss_color(pred: &ColorMap, gt: &ColorMap) -> Result<f64> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    let mut total = 0.0;
    for c in 0..3 {
        total += laplacian_loss(&pred.channel(c), &gt.channel(c))?;
    }
    Ok(total)
}

/// `Σ ‖F̂ − F‖₁ + ‖B̂ − B‖₁` over the mask.
pub fn l1_fb(
    pred_fg: &ColorMap,
    pred_bg: &ColorMap,
    gt_fg: &ColorMap,
    gt_bg: &ColorMap,
    mask: &EvalMask,
) -> Result<f64> {
    let d = pred_fg.dims();
    check_dims("pred_fg", d, "pred_bg", pred_bg.dims())?;
    check_dims("pred_fg", d, "gt_fg", gt_fg.dims())?;
    check_dims("pred_fg", d, "gt_bg", gt_bg.dims())?;
    check_mask("pred_fg", d, mask)?;
    let mut acc = 0.0;
    for c in 0..3 {
        acc += masked_abs_sum(pred_fg.plane(c), gt_fg.plane(c), mask);
    }
    for c in 0..3 {
        acc += masked_abs_sum(pred_bg.plane(c), gt_bg.plane(c), mask);
    }
    Ok(acc)
}

/// Per-pixel `Σ_c |∂x| + |∂y|` of a color map.
fn gradient_magnitude_l1(map: &ColorMap, op: GradientOperator) -> Vec<f64> {
    let mut mag = vec![0.0f64; map.width() * map.height()];
    for c in 0..3 {
        let (gx, gy) = op.apply(&map.channel(c));
        for (k, m) in mag.iter_mut().enumerate() {
            *m += gx.data()[k].abs() as f64 + gy.data()[k].abs() as f64;
        }
    }
    mag
}

/// `Σ ‖∇F̂‖₁ · ‖∇B̂‖₁` over the mask.
pub fn exclusion_loss(
    pred_fg: &ColorMap,
    pred_bg: &ColorMap,
    mask: &EvalMask,
    op: GradientOperator,
) -> Result<f64> {
    check_dims("pred_fg", pred_fg.dims(), "pred_bg", pred_bg.dims())?;
    check_mask("pred_fg", pred_fg.dims(), mask)?;
    let gf = gradient_magnitude_l1(pred_fg, op);
    let gb = gradient_magnitude_l1(pred_bg, op);
    Ok(gf
        .iter()
        .zip(&gb)
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|((f, b), _)| f * b)
        .sum())
}

/// Compositional loss on predicted layers with ground-truth alpha.
pub fn composition_loss_fb(
    pred_fg: &ColorMap,
    pred_bg: &ColorMap,
    gt_alpha: &PixelMap,
    image: &ColorMap,
    mask: &EvalMask,
) -> Result<f64> {
    let d = gt_alpha.dims();
    check_dims("gt_alpha", d, "pred_fg", pred_fg.dims())?;
    check_dims("gt_alpha", d, "pred_bg", pred_bg.dims())?;
    check_dims("gt_alpha", d, "image", image.dims())?;
    check_mask("gt_alpha", d, mask)?;
    Ok(reconstruction_l1(gt_alpha, pred_fg, pred_bg, image, mask))
}

/// All eight terms with the default configuration (forward differences, sums).
pub fn total_loss(
    pred: &PredictionSet,
    gt: &PredictionSet,
    image: &ColorMap,
    mask_alpha: &EvalMask,
    mask_fb: &EvalMask,
) -> Result<LossReport> {
    total_loss_with(pred, gt, image, mask_alpha, mask_fb, LossConfig::default())
}

pub fn total_loss_with(
    pred: &PredictionSet,
    gt: &PredictionSet,
    image: &ColorMap,
    mask_alpha: &EvalMask,
    mask_fb: &EvalMask,
    config: LossConfig,
) -> Result<LossReport> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    let op = config.gradient;
    let mut report = LossReport {
        l1_alpha: l1_alpha(&pred.alpha, &gt.alpha, mask_alpha)?,
        comp_alpha: composition_loss_alpha(&pred.alpha, &gt.fg, &gt.bg, image, mask_alpha)?,
        grad_alpha: gradient_loss_alpha(&pred.alpha, &gt.alpha, mask_alpha, op)?,
        lap_alpha: laplacian_loss(&pred.alpha, &gt.alpha)?,
        l1_fb: l1_fb(&pred.fg, &pred.bg, &gt.fg, &gt.bg, mask_fb)?,
        lap_fb: laplacian_loss_color(&pred.fg, &gt.fg)? + laplacian_loss_color(&pred.bg, &gt.bg)?,
        comp_fb: composition_loss_fb(&pred.fg, &pred.bg, &gt.alpha, image, mask_fb)?,
        excl_fb: exclusion_loss(&pred.fg, &pred.bg, mask_fb, op)?,
        total: 0.0,
    };
    if config.reduction == Reduction::Mean {
        let na = mask_alpha.count();
        let nf = mask_fb.count();
        if na == 0 || nf == 0 {
            return Err(Error::EmptyRegion);
        }
        let n = pred.alpha.len() as f64;
        let (na, nf) = (na as f64, nf as f64);
        report.l1_alpha /= na;
        report.comp_alpha /= na;
        report.grad_alpha /= na;
        report.lap_alpha /= n;
        report.l1_fb /= nf;
        report.lap_fb /= n;
        report.comp_fb /= nf;
        report.excl_fb /= nf;
    }
    Ok(report.with_total())
}
