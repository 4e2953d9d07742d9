//! Closed-form foreground / background estimation from an image and its
//! alpha matte.
//!
//! For each color channel the solver minimizes
//!
//! ```text
//! Σ_i (α_i F_i + (1 − α_i) B_i − C_i)²
//!   + λ Σ_{(p,q)} w_pq ((F_p − F_q)² + (B_p − B_q)²)
//! ```
//!
//! over a 4-connected grid with `w_pq = |α_p − α_q| + ε`. The floor `ε`
//! lets colors diffuse into flat-alpha regions, so both layers come out
//! defined at every pixel. The normal equations
//!
//! ```text
//! [ diag(α²) + λL        diag(α(1−α))   ] [F]   [ αC      ]
//! [ diag(α(1−α))         diag((1−α)²) + λL ] [B] = [ (1−α)C ]
//! ```
//!
//! (`L` the weighted grid Laplacian) are symmetric positive semi-definite
//! with a right-hand side in the range of the matrix, and are solved
//! matrix-free with Jacobi-preconditioned conjugate gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::filter::resize_bilinear;
use crate::maps::{clamp01, ColorMap, PixelMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FBSolveParams {
    /// λ, the weight of the smoothness term.
    pub smoothness_weight: f64,
    /// ε, added to every edge weight.
    pub edge_floor: f64,
    /// Target for `‖b − Ax‖ / ‖b‖`.
    pub cg_tolerance: f64,
    /// `None` selects `10·w·h`, capped at 50 000.
    pub cg_max_iters: Option<usize>,
    /// Initialize from a solve at half resolution.
    pub multires: bool,
    /// Row-parallel matrix application. Results are bitwise identical to the
    /// serial path.
    pub parallel: bool,
}

impl Default for FBSolveParams {
    fn default() -> Self {
        Self {
            smoothness_weight: 1.0,
            edge_floor: 0.003,
            cg_tolerance: 1e-7,
            cg_max_iters: None,
            multires: false,
            parallel: false,
        }
    }
}

impl FBSolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothness_weight >= 0.0 && self.smoothness_weight.is_finite()) {
            return Err(Error::invalid("smoothness_weight", "must be finite and >= 0"));
        }
        if !(self.edge_floor >= 0.0 && self.edge_floor.is_finite()) {
            return Err(Error::invalid("edge_floor", "must be finite and >= 0"));
        }
        if !(self.cg_tolerance > 0.0 && self.cg_tolerance < 1.0) {
            return Err(Error::invalid("cg_tolerance", "must lie in (0, 1)"));
        }
        if self.cg_max_iters == Some(0) {
            return Err(Error::invalid("cg_max_iters", "must be at least 1"));
        }
        Ok(())
    }

    pub fn max_iters(&self, width: usize, height: usize) -> usize {
        self.cg_max_iters
            .unwrap_or_else(|| (10 * width * height).clamp(1, 50_000))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub iterations: usize,
    pub initial_residual: f64,
    /// `‖b − Ax‖ / ‖b‖` of the unclamped solution.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FBSolution {
    pub fg: ColorMap,
    pub bg: ColorMap,
    pub stats: [ChannelStats; 3],
}

/// The per-channel linear operator. Unknowns are laid out `[F; B]`.
struct System {
    width: usize,
    height: usize,
    alpha: Vec<f64>,
    /// Weight of the edge to the right neighbour, `λ·w`.
    wx: Vec<f64>,
    /// Weight of the edge to the neighbour below, `λ·w`.
    wy: Vec<f64>,
    parallel: bool,
}

impl System {
    fn new(alpha: &PixelMap, params: &FBSolveParams) -> Self {
        let (w, h) = alpha.dims();
        let a: Vec<f64> = alpha.data().iter().map(|&v| v as f64).collect();
        let lambda = params.smoothness_weight;
        let mut wx = vec![0.0; w * h];
        let mut wy = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    wx[i] = lambda * ((a[i] - a[i + 1]).abs() + params.edge_floor);
                }
                if y + 1 < h {
                    wy[i] = lambda * ((a[i] - a[i + w]).abs() + params.edge_floor);
                }
            }
        }
        Self {
            width: w,
            height: h,
            alpha: a,
            wx,
            wy,
            parallel: params.parallel,
        }
    }

    fn n(&self) -> usize {
        self.width * self.height
    }

    fn rhs(&self, image: &[f32]) -> Vec<f64> {
        let n = self.n();
        let mut b = vec![0.0; 2 * n];
        for i in 0..n {
            let c = image[i] as f64;
            b[i] = self.alpha[i] * c;
            b[n + i] = (1.0 - self.alpha[i]) * c;
        }
        b
    }

    fn edge_sum(&self, i: usize) -> f64 {
        let w = self.width;
        let (x, y) = (i % w, i / w);
        let mut s = self.wx[i] + self.wy[i];
        if x > 0 {
            s += self.wx[i - 1];
        }
        if y > 0 {
            s += self.wy[i - w];
        }
        s
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.n();
        let mut d = vec![0.0; 2 * n];
        for i in 0..n {
            let a = self.alpha[i];
            let e = self.edge_sum(i);
            d[i] = a * a + e;
            d[n + i] = (1.0 - a) * (1.0 - a) + e;
        }
        d
    }

    /// `Σ_q w_iq (v_i − v_q)` for one layer.
    #[inline]
    fn laplacian_at(&self, v: &[f64], i: usize) -> f64 {
        let w = self.width;
        let (x, y) = (i % w, i / w);
        let vi = v[i];
        let mut s = 0.0;
        if x + 1 < w {
            s += self.wx[i] * (vi - v[i + 1]);
        }
        if x > 0 {
            s += self.wx[i - 1] * (vi - v[i - 1]);
        }
        if y + 1 < self.height {
            s += self.wy[i] * (vi - v[i + w]);
        }
        if y > 0 {
            s += self.wy[i - w] * (vi - v[i - w]);
        }
        s
    }

    fn apply_row(&self, x: &[f64], y: usize, out_f: &mut [f64], out_b: &mut [f64]) {
        let n = self.n();
        let (f, b) = x.split_at(n);
        for col in 0..self.width {
            let i = y * self.width + col;
            let a = self.alpha[i];
            let cross = a * (1.0 - a);
            out_f[col] = a * a * f[i] + cross * b[i] + self.laplacian_at(f, i);
            out_b[col] = cross * f[i] + (1.0 - a) * (1.0 - a) * b[i] + self.laplacian_at(b, i);
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let w = self.width;
        let (out_f, out_b) = out.split_at_mut(n);
        if self.parallel {
            out_f
                .par_chunks_mut(w)
                .zip(out_b.par_chunks_mut(w))
                .enumerate()
                .for_each(|(y, (rf, rb))| self.apply_row(x, y, rf, rb));
        } else {
            for (y, (rf, rb)) in out_f.chunks_mut(w).zip(out_b.chunks_mut(w)).enumerate() {
                self.apply_row(x, y, rf, rb);
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(sys: &System, x: &[f64], b: &[f64], scratch: &mut [f64]) -> Vec<f64> {
    sys.apply(x, scratch);
    b.iter().zip(scratch.iter()).map(|(b, ax)| b - ax).collect()
}

/// Jacobi-preconditioned conjugate gradients from `x`. Returns the
/// iteration count and the final true relative residual.
fn pcg(
    sys: &System,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
    channel: usize,
) -> Result<ChannelStats> {
    let inv_diag: Vec<f64> = sys
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = norm(b);
    let mut ax = vec![0.0; b.len()];
    let mut r = residual(sys, x, b, &mut ax);
    let initial = norm(&r);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(ChannelStats {
            iterations: 0,
            initial_residual: 0.0,
            relative_residual: 0.0,
        });
    }
    let target = tol * bnorm;
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rnorm = initial;
    while iterations < max_iters {
        if rnorm <= target {
            // confirm against the true residual before stopping
            r = residual(sys, x, b, &mut ax);
            rnorm = norm(&r);
            if rnorm <= target {
                break;
            }
            z = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
            p.clone_from(&z);
            rz = dot(&r, &z);
        }
        sys.apply(&p, &mut ax);
        let pap = dot(&p, &ax);
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ax)) {
            *xi += step * pi;
            *ri -= step * api;
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rnorm = norm(&r);
        iterations += 1;
    }
    let true_r = norm(&residual(sys, x, b, &mut ax));
    let relative = true_r / bnorm;
    if relative > tol {
        return Err(Error::NotConverged {
            channel,
            iterations,
            residual: relative,
        });
    }
    Ok(ChannelStats {
        iterations,
        initial_residual: initial / bnorm,
        relative_residual: relative,
    })
}

fn check_inputs(image: &ColorMap, alpha: &PixelMap) -> Result<()> {
    check_dims("image", image.dims(), "alpha", alpha.dims())
}

fn initial_guess(image: &ColorMap, alpha: &PixelMap, params: &FBSolveParams) -> Result<Option<(ColorMap, ColorMap)>> {
    let (w, h) = alpha.dims();
    if !params.multires || w < 16 || h < 16 {
        return Ok(None);
    }
    let (hw, hh) = (w.div_ceil(2), h.div_ceil(2));
    let small_img = image.map_channels(|p| resize_bilinear(p, hw, hh));
    let small_alpha = resize_bilinear(alpha, hw, hh);
    let coarse = solve_fb(&small_img, &small_alpha, params)?;
    Ok(Some((
        coarse.fg.map_channels(|p| resize_bilinear(p, w, h)),
        coarse.bg.map_channels(|p| resize_bilinear(p, w, h)),
    )))
}

/// Estimates foreground and background colors at every pixel.
pub fn solve_fb(image: &ColorMap, alpha: &PixelMap, params: &FBSolveParams) -> Result<FBSolution> {
    params.validate()?;
    check_inputs(image, alpha)?;
    let (w, h) = alpha.dims();
    let n = w * h;
    let sys = System::new(alpha, params);
    let max_iters = params.max_iters(w, h);
    let guess = initial_guess(image, alpha, params)?;

    let solve_channel = |c: usize| -> Result<(Vec<f64>, ChannelStats)> {
        let b = sys.rhs(image.plane(c));
        let mut x = vec![0.0; 2 * n];
        if let Some((gf, gb)) = &guess {
            for i in 0..n {
                x[i] = gf.plane(c)[i] as f64;
                x[n + i] = gb.plane(c)[i] as f64;
            }
        }
        let stats = pcg(&sys, &b, &mut x, params.cg_tolerance, max_iters, c)?;
        Ok((x, stats))
    };
    let results: Vec<Result<(Vec<f64>, ChannelStats)>> =
        (0..3).into_par_iter().map(solve_channel).collect();

    let mut fg = Vec::with_capacity(3 * n);
    let mut bg = Vec::with_capacity(3 * n);
    let mut stats = Vec::with_capacity(3);
    let mut solutions = Vec::with_capacity(3);
    for r in results {
        let (x, s) = r?;
        stats.push(s);
        solutions.push(x);
    }
    for x in &solutions {
        fg.extend(x[..n].iter().map(|&v| clamp01(v as f32)));
    }
    for x in &solutions {
        bg.extend(x[n..].iter().map(|&v| clamp01(v as f32)));
    }
    Ok(FBSolution {
        fg: ColorMap::new(w, h, fg),
        bg: ColorMap::new(w, h, bg),
        stats: [stats[0], stats[1], stats[2]],
    })
}

/// `‖b − A[F; B]‖ / ‖b‖` over all three channels for a candidate solution.
/// When `b = 0` the absolute norm is returned.
pub fn system_residual(
    image: &ColorMap,
    alpha: &PixelMap,
    fg: &ColorMap,
    bg: &ColorMap,
    params: &FBSolveParams,
) -> Result<f64> {
    check_inputs(image, alpha)?;
    check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
    check_dims("alpha", alpha.dims(), "bg", bg.dims())?;
    let sys = System::new(alpha, params);
    let n = sys.n();
    let mut rr = 0.0;
    let mut bb = 0.0;
    let mut ax = vec![0.0; 2 * n];
    for c in 0..3 {
        let b = sys.rhs(image.plane(c));
        let x: Vec<f64> = fg
            .plane(c)
            .iter()
            .chain(bg.plane(c))
            .map(|&v| v as f64)
            .collect();
        let r = residual(&sys, &x, &b, &mut ax);
        rr += dot(&r, &r);
        bb += dot(&b, &b);
    }
    Ok(if bb > 0.0 { (rr / bb).sqrt() } else { rr.sqrt() })
}

/// The objective value for a candidate solution, summed over channels.
pub fn objective(
    image: &ColorMap,
    alpha: &PixelMap,
    fg: &ColorMap,
    bg: &ColorMap,
    params: &FBSolveParams,
) -> Result<f64> {
    check_inputs(image, alpha)?;
    check_dims("alpha", alpha.dims(), "fg", fg.dims())?;
    check_dims("alpha", alpha.dims(), "bg", bg.dims())?;
    let sys = System::new(alpha, params);
    let w = sys.width;
    let mut total = 0.0;
    for c in 0..3 {
        let (f, b, img) = (fg.plane(c), bg.plane(c), image.plane(c));
        for i in 0..sys.n() {
            let a = sys.alpha[i];
            let r = a * f[i] as f64 + (1.0 - a) * b[i] as f64 - img[i] as f64;
            total += r * r;
            let mut edge = |j: usize, wt: f64| {
                let df = (f[i] - f[j]) as f64;
                let db = (b[i] - b[j]) as f64;
                total += wt * (df * df + db * db);
            };
            if i % w + 1 < w {
                edge(i + 1, sys.wx[i]);
            }
            if i / w + 1 < sys.height {
                edge(i + w, sys.wy[i]);
            }
        }
    }
    Ok(total)
}
