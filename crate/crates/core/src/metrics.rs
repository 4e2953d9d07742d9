//! Matte quality metrics: SAD, MSE, gradient error and connectivity error,
//! plus SAD / MSE of the premultiplied foreground.
//!
//! All functions return raw values. Benchmark tables print SAD, GRAD and
//! CONN divided by 1000 and MSE multiplied by 1000; [`TableConvention`]
//! applies those scales.

use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::filter::Border;
use crate::losses::EvalMask;
use crate::maps::{premultiply, PixelMap, PredictionSet};

fn check_pair(pred: &PixelMap, gt: &PixelMap, region: &EvalMask) -> Result<()> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    check_dims("pred", pred.dims(), "region", region.dims())
}

/// `Σ_region |pred − gt|`.
pub fn sad(pred: &PixelMap, gt: &PixelMap, region: &EvalMask) -> Result<f64> {
    check_pair(pred, gt, region)?;
    Ok(pred
        .data()
        .iter()
        .zip(gt.data())
        .zip(region.data())
        .filter(|(_, &m)| m)
        .map(|((&p, &g), _)| (p as f64 - g as f64).abs())
        .sum())
}

/// Mean over the region of `(pred − gt)²`.
pub fn mse(pred: &PixelMap, gt: &PixelMap, region: &EvalMask) -> Result<f64> {
    check_pair(pred, gt, region)?;
    let n = region.count();
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    let sum: f64 = pred
        .data()
        .iter()
        .zip(gt.data())
        .zip(region.data())
        .filter(|(_, &m)| m)
        .map(|((&p, &g), _)| {
            let d = p as f64 - g as f64;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientParams {
    pub sigma: f64,
    pub q: f64,
}

impl Default for GradientParams {
    fn default() -> Self {
        Self { sigma: 1.4, q: 2.0 }
    }
}

fn gauss(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn dgauss(x: f64, sigma: f64) -> f64 {
    -x * gauss(x, sigma) / (sigma * sigma)
}

/// Half-width of the derivative-of-Gaussian support: the smallest radius
/// where the Gaussian falls below 1% of its peak-normalized value.
pub fn dog_half_size(sigma: f64) -> usize {
    let eps = 1e-2;
    let v = -2.0 * sigma * sigma * ((2.0 * std::f64::consts::PI).sqrt() * sigma * eps).ln();
    v.max(0.0).sqrt().ceil() as usize
}

/// 1-D factors of the x-derivative filter `h(y, x) = g(y) · g'(x)`,
/// scaled so the 2-D kernel has unit L2 norm. The y-derivative filter is
/// the transpose.
pub fn dog_factors(sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let r = dog_half_size(sigma) as isize;
    let g: Vec<f64> = (-r..=r).map(|i| gauss(i as f64, sigma)).collect();
    let dg: Vec<f64> = (-r..=r).map(|i| dgauss(i as f64, sigma)).collect();
    let norm = (g.iter().map(|v| v * v).sum::<f64>() * dg.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let dg = dg.into_iter().map(|v| v / norm).collect();
    (g, dg)
}

/// Convolution (flipped kernel) along rows then columns in `f64`,
/// replicate borders.
fn convolve_sep(src: &PixelMap, kx: &[f64], ky: &[f64]) -> Vec<f64> {
    let (w, h) = src.dims();
    let rx = (kx.len() / 2) as isize;
    let ry = (ky.len() / 2) as isize;
    let b = Border::Replicate;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kx.iter().enumerate() {
                let xi = b.index(x as isize - (k as isize - rx), w);
                acc += kv * src.get(xi, y) as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in ky.iter().enumerate() {
                let yi = b.index(y as isize - (k as isize - ry), h);
                acc += kv * tmp[yi * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Derivative-of-Gaussian gradient `(∂x, ∂y)` of a map.
pub fn dog_gradient(map: &PixelMap, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (g, dg) = dog_factors(sigma);
    (convolve_sep(map, &dg, &g), convolve_sep(map, &g, &dg))
}

/// `Σ_region ‖∇_G pred − ∇_G gt‖^q`.
pub fn gradient_error(
    pred: &PixelMap,
    gt: &PixelMap,
    region: &EvalMask,
    params: GradientParams,
) -> Result<f64> {
    check_pair(pred, gt, region)?;
    if !(params.sigma > 0.0 && params.sigma.is_finite()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    if !(params.q > 0.0 && params.q.is_finite()) {
        return Err(Error::invalid("q", "must be positive"));
    }
    let (px, py) = dog_gradient(pred, params.sigma);
    let (gx, gy) = dog_gradient(gt, params.sigma);
    let mut acc = 0.0;
    for k in 0..pred.len() {
        if region.data()[k] {
            let dx = px[k] - gx[k];
            let dy = py[k] - gy[k];
            acc += (dx * dx + dy * dy).sqrt().powf(params.q);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityParams {
    pub step: f64,
    pub theta: f64,
}

impl Default for ConnectivityParams {
    fn default() -> Self {
        Self {
            step: 0.1,
            theta: 0.15,
        }
    }
}

impl ConnectivityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(Error::invalid("step", "must lie in (0, 0.5]"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::invalid("theta", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Threshold grid `{0, step, 2·step, …}` up to the source level `1 − step`.
    pub fn thresholds(&self) -> Vec<f64> {
        let top = 1.0 - self.step;
        let count = ((top / self.step) + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * self.step).collect()
    }
}

const NEIGHBOURS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn neighbours(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = ((i % w) as isize, (i / w) as isize);
    NEIGHBOURS.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize).then(|| ny as usize * w + nx as usize)
    })
}

/// Largest 4-connected component of `set`; ties go to the component whose
/// first pixel comes first in row-major order.
pub fn largest_component(set: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut label = vec![usize::MAX; w * h];
    let mut best: Option<(usize, usize)> = None;
    let mut queue = VecDeque::new();
    let mut next = 0;
    for start in 0..w * h {
        if !set[start] || label[start] != usize::MAX {
            continue;
        }
        let id = next;
        next += 1;
        label[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            for j in neighbours(i, w, h) {
                if set[j] && label[j] == usize::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((id, size));
        }
    }
    match best {
        Some((id, _)) => label.iter().map(|&l| l == id).collect(),
        None => vec![false; w * h],
    }
}

/// Shared source region: the largest 4-connected component where both
/// mattes reach `1 − step`.
pub fn connectivity_source(pred: &PixelMap, gt: &PixelMap, step: f64) -> Vec<bool> {
    let top = 1.0 - step;
    let both: Vec<bool> = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| p as f64 >= top && g as f64 >= top)
        .collect();
    largest_component(&both, pred.width(), pred.height())
}

/// For every pixel, the largest `t` such that a 4-connected path inside
/// `{m ≥ t}` joins it to the source. Computed as a widest-path search and
/// quantized down to the threshold grid.
fn connection_levels(m: &PixelMap, source: &[bool], thresholds: &[f64]) -> Vec<f64> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
        }
    }

    let (w, h) = m.dims();
    let vals: Vec<f64> = m.data().iter().map(|&v| v as f64).collect();
    let mut bottleneck = vec![f64::NEG_INFINITY; w * h];
    let mut heap = BinaryHeap::new();
    for (i, &s) in source.iter().enumerate() {
        if s {
            bottleneck[i] = vals[i];
            heap.push(Item(vals[i], i));
        }
    }
    let mut done = vec![false; w * h];
    while let Some(Item(b, i)) = heap.pop() {
        if done[i] {
            continue;
        }
        done[i] = true;
        for j in neighbours(i, w, h) {
            let cand = b.min(vals[j]);
            if !done[j] && cand > bottleneck[j] {
                bottleneck[j] = cand;
                heap.push(Item(cand, j));
            }
        }
    }
    bottleneck
        .into_iter()
        .map(|b| {
            thresholds
                .iter()
                .rev()
                .find(|&&t| t <= b)
                .copied()
                .unwrap_or(0.0)
        })
        .collect()
}

/// `φ_i = 1 − d_i` when `d_i = m_i − l_i ≥ θ`, else 1.
pub fn connectivity_phi(m: &PixelMap, source: &[bool], params: ConnectivityParams) -> Vec<f64> {
    let levels = connection_levels(m, source, &params.thresholds());
    m.data()
        .iter()
        .zip(levels)
        .map(|(&v, l)| {
            let d = v as f64 - l;
            if d >= params.theta {
                1.0 - d
            } else {
                1.0
            }
        })
        .collect()
}

/// `Σ_region |φ(pred) − φ(gt)|` with a shared source region.
pub fn connectivity_error(
    pred: &PixelMap,
    gt: &PixelMap,
    region: &EvalMask,
    params: ConnectivityParams,
) -> Result<f64> {
    check_pair(pred, gt, region)?;
    params.validate()?;
    let source = connectivity_source(pred, gt, params.step);
    if !source.iter().any(|&s| s) {
        return Err(Error::NoSourceRegion(format!(
            "no pixel has both mattes >= {}",
            1.0 - params.step
        )));
    }
    let pp = connectivity_phi(pred, &source, params);
    let gp = connectivity_phi(gt, &source, params);
    Ok(pp
        .iter()
        .zip(&gp)
        .zip(region.data())
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| (a - b).abs())
        .sum())
}

/// SAD and MSE of the premultiplied foreground `αF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForegroundMetrics {
    pub sad: f64,
    /// Mean over region pixels of the per-pixel squared error summed over
    /// the three channels.
    pub mse: f64,
}

pub fn fg_composite_metrics(
    pred: &PredictionSet,
    gt: &PredictionSet,
    region: &EvalMask,
) -> Result<ForegroundMetrics> {
    check_dims("pred", pred.dims(), "gt", gt.dims())?;
    check_dims("pred", pred.dims(), "region", region.dims())?;
    let n = region.count();
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    let p = premultiply(&pred.alpha, &pred.fg)?;
    let g = premultiply(&gt.alpha, &gt.fg)?;
    let mut sad = 0.0;
    let mut sq = 0.0;
    for c in 0..3 {
        for ((&a, &b), &m) in p.plane(c).iter().zip(g.plane(c)).zip(region.data()) {
            if m {
                let d = a as f64 - b as f64;
                sad += d.abs();
                sq += d * d;
            }
        }
    }
    Ok(ForegroundMetrics {
        sad,
        mse: sq / n as f64,
    })
}

/// Scales used when printing benchmark tables.
pub struct TableConvention;

impl TableConvention {
    pub const SAD_DIVISOR: f64 = 1000.0;
    pub const MSE_FACTOR: f64 = 1000.0;
    pub const GRAD_DIVISOR: f64 = 1000.0;
    pub const CONN_DIVISOR: f64 = 1000.0;

    pub fn sad(raw: f64) -> f64 {
        raw / Self::SAD_DIVISOR
    }

    pub fn mse(raw: f64) -> f64 {
        raw * Self::MSE_FACTOR
    }

    pub fn grad(raw: f64) -> f64 {
        raw / Self::GRAD_DIVISOR
    }

    pub fn conn(raw: f64) -> f64 {
        raw / Self::CONN_DIVISOR
    }
}
