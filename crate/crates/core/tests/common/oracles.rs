//! Naive reference implementations used as test oracles. Each one is a
//! direct per-pixel loop over the defining formula and shares no code with
//! the library beyond the container types.

#![allow(dead_code)]

use fba_core::{ColorMap, EvalMask, PixelMap};

pub const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Half-sample symmetric index folding by repeated reflection.
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

pub fn replicate(i: isize, n: usize) -> usize {
    if i < 0 {
        0
    } else if i as usize >= n {
        n - 1
    } else {
        i as usize
    }
}

// ---------------------------------------------------------------- losses

/// Accumulation order for every pixel sum below: channel-major, then
/// row-major, per-pixel term in `f32`, running sum in `f64`.
pub fn l1_alpha(pred: &PixelMap, gt: &PixelMap, mask: &EvalMask) -> f64 {
    let mut acc = 0.0f64;
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            if mask.contains(x, y) {
                acc += (pred.get(x, y) - gt.get(x, y)).abs() as f64;
            }
        }
    }
    acc
}

pub fn reconstruction(
    alpha: &PixelMap,
    fg: &ColorMap,
    bg: &ColorMap,
    image: &ColorMap,
    mask: &EvalMask,
) -> f64 {
    let mut acc = 0.0f64;
    for c in 0..3 {
        for y in 0..alpha.height() {
            for x in 0..alpha.width() {
                if mask.contains(x, y) {
                    let a = alpha.get(x, y);
                    let model = a * fg.get(c, x, y) + (1.0 - a) * bg.get(c, x, y);
                    let r = image.get(c, x, y) - model;
                    acc += r.abs() as f64;
                }
            }
        }
    }
    acc
}

pub fn l1_fb(
    pred_fg: &ColorMap,
    pred_bg: &ColorMap,
    gt_fg: &ColorMap,
    gt_bg: &ColorMap,
    mask: &EvalMask,
) -> f64 {
    let mut acc = 0.0f64;
    for (p, g) in [(pred_fg, gt_fg), (pred_bg, gt_bg)] {
        for c in 0..3 {
            for y in 0..p.height() {
                for x in 0..p.width() {
                    if mask.contains(x, y) {
                        acc += (p.get(c, x, y) - g.get(c, x, y)).abs() as f64;
                    }
                }
            }
        }
    }
    acc
}

/// Forward differences with replicated borders.
pub fn forward_diff(m: &PixelMap, x: usize, y: usize) -> (f32, f32) {
    let (w, h) = m.dims();
    let xr = replicate(x as isize + 1, w);
    let yd = replicate(y as isize + 1, h);
    (m.get(xr, y) - m.get(x, y), m.get(x, yd) - m.get(x, y))
}

pub fn grad_alpha(pred: &PixelMap, gt: &PixelMap, mask: &EvalMask) -> f64 {
    let mut acc = 0.0f64;
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            if mask.contains(x, y) {
                let (px, py) = forward_diff(pred, x, y);
                let (gx, gy) = forward_diff(gt, x, y);
                acc += ((px - gx).abs() + (py - gy).abs()) as f64;
            }
        }
    }
    acc
}

pub fn exclusion(fg: &ColorMap, bg: &ColorMap, mask: &EvalMask) -> f64 {
    let mag = |m: &ColorMap, x: usize, y: usize| -> f64 {
        (0..3)
            .map(|c| {
                let (gx, gy) = forward_diff(&m.channel(c), x, y);
                gx.abs() as f64 + gy.abs() as f64
            })
            .sum()
    };
    let mut acc = 0.0;
    for y in 0..fg.height() {
        for x in 0..fg.width() {
            if mask.contains(x, y) {
                acc += mag(fg, x, y) * mag(bg, x, y);
            }
        }
    }
    acc
}

// --------------------------------------------------------------- pyramid

/// Direct 5×5 blur evaluated only at even positions.
pub fn reduce(m: &PixelMap) -> PixelMap {
    let (w, h) = m.dims();
    let (cw, ch) = ((w + 1) / 2, (h + 1) / 2);
    PixelMap::from_fn(cw, ch, |cx, cy| {
        let (px, py) = (2 * cx as isize, 2 * cy as isize);
        let mut acc = 0.0f64;
        for (j, wy) in BINOMIAL.iter().enumerate() {
            for (i, wx) in BINOMIAL.iter().enumerate() {
                let sx = reflect(px + i as isize - 2, w);
                let sy = reflect(py + j as isize - 2, h);
                acc += wx * wy * m.get(sx, sy) as f64;
            }
        }
        (acc / 256.0) as f32
    })
}

/// Bilinear interpolation at parent position `p`, child sample `j` sitting
/// at `2j`.
pub fn expand(child: &PixelMap, w: usize, h: usize) -> PixelMap {
    let (cw, ch) = child.dims();
    PixelMap::from_fn(w, h, |x, y| {
        let u = x as f64 / 2.0;
        let v = y as f64 / 2.0;
        let x0 = u.floor() as usize;
        let y0 = v.floor() as usize;
        let x1 = (x0 + 1).min(cw - 1);
        let y1 = (y0 + 1).min(ch - 1);
        let fx = u - x0 as f64;
        let fy = v - y0 as f64;
        let g = |a: usize, b: usize| child.get(a, b) as f64;
        let val = (1.0 - fx) * (1.0 - fy) * g(x0, y0)
            + fx * (1.0 - fy) * g(x1, y0)
            + (1.0 - fx) * fy * g(x0, y1)
            + fx * fy * g(x1, y1);
        val as f32
    })
}

pub fn pyramid(m: &PixelMap, levels: usize) -> (Vec<PixelMap>, PixelMap) {
    let mut bands = Vec::new();
    let mut cur = m.clone();
    for _ in 0..levels {
        let low = reduce(&cur);
        let up = expand(&low, cur.width(), cur.height());
        bands.push(PixelMap::from_fn(cur.width(), cur.height(), |x, y| {
            cur.get(x, y) - up.get(x, y)
        }));
        cur = low;
    }
    (bands, cur)
}

pub fn laplacian_loss(pred: &PixelMap, gt: &PixelMap) -> f64 {
    let (pa, _) = pyramid(pred, 5);
    let (ga, _) = pyramid(gt, 5);
    let mut total = 0.0;
    for (s, (a, b)) in pa.iter().zip(&ga).enumerate() {
        let mut l1 = 0.0f64;
        for (p, q) in a.data().iter().zip(b.data()) {
            l1 += (p - q).abs() as f64;
        }
        total += 2f64.powi(s as i32) * l1;
    }
    total
}

pub fn laplacian_loss_color(pred: &ColorMap, gt: &ColorMap) -> f64 {
    (0..3)
        .map(|c| laplacian_loss(&pred.channel(c), &gt.channel(c)))
        .sum()
}

// --------------------------------------------------------------- metrics

pub fn sad(pred: &PixelMap, gt: &PixelMap, region: &EvalMask) -> f64 {
    let mut acc = 0.0f64;
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            if region.contains(x, y) {
                acc += (pred.get(x, y) as f64 - gt.get(x, y) as f64).abs();
            }
        }
    }
    acc
}

pub fn mse(pred: &PixelMap, gt: &PixelMap, region: &EvalMask) -> f64 {
    let mut acc = 0.0f64;
    let mut n = 0usize;
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            if region.contains(x, y) {
                let d = pred.get(x, y) as f64 - gt.get(x, y) as f64;
                acc += d * d;
                n += 1;
            }
        }
    }
    acc / n as f64
}

/// Radius where the sampled Gaussian drops below 1% (peak-normalized).
pub fn dog_radius(sigma: f64) -> isize {
    let mut r = 0isize;
    let peak_scaled = (2.0 * std::f64::consts::PI).sqrt() * sigma * 1e-2;
    while (-(r * r) as f64 / (2.0 * sigma * sigma)).exp() > peak_scaled {
        r += 1;
    }
    r
}

/// Full 2-D `∂x` kernel `g(i)·g'(j)` (row offset `i`, column offset `j`),
/// unit L2 norm.
pub fn dog_kernel(sigma: f64) -> (isize, Vec<Vec<f64>>) {
    let r = dog_radius(sigma);
    let g = |t: f64| (-t * t / (2.0 * sigma * sigma)).exp();
    let mut k = vec![vec![0.0; (2 * r + 1) as usize]; (2 * r + 1) as usize];
    let mut norm = 0.0;
    for i in -r..=r {
        for j in -r..=r {
            let v = g(i as f64) * (-(j as f64) / (sigma * sigma)) * g(j as f64);
            k[(i + r) as usize][(j + r) as usize] = v;
            norm += v * v;
        }
    }
    let norm = norm.sqrt();
    for row in &mut k {
        for v in row {
            *v /= norm;
        }
    }
    (r, k)
}

/// Direct 2-D convolution with replicate borders.
pub fn dog_gradient(m: &PixelMap, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (r, k) = dog_kernel(sigma);
    let (w, h) = m.dims();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut ax, mut ay) = (0.0, 0.0);
            for i in -r..=r {
                for j in -r..=r {
                    let kv = k[(i + r) as usize][(j + r) as usize];
                    let vx = m.get(
                        replicate(x as isize - j, w),
                        replicate(y as isize - i, h),
                    ) as f64;
                    let vy = m.get(
                        replicate(x as isize - i, w),
                        replicate(y as isize - j, h),
                    ) as f64;
                    ax += kv * vx;
                    ay += kv * vy;
                }
            }
            gx[y * w + x] = ax;
            gy[y * w + x] = ay;
        }
    }
    (gx, gy)
}

pub fn gradient_error(pred: &PixelMap, gt: &PixelMap, region: &EvalMask, sigma: f64, q: f64) -> f64 {
    let (px, py) = dog_gradient(pred, sigma);
    let (gx, gy) = dog_gradient(gt, sigma);
    let w = pred.width();
    let mut acc = 0.0;
    for y in 0..pred.height() {
        for x in 0..w {
            if region.contains(x, y) {
                let k = y * w + x;
                acc += ((px[k] - gx[k]).powi(2) + (py[k] - gy[k]).powi(2)).sqrt().powf(q);
            }
        }
    }
    acc
}

/// Flood fill from `seeds` within `allowed`, 4-connected.
pub fn flood(allowed: &[bool], seeds: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut seen = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| seeds[i] && allowed[i]).collect();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        let mut nb = Vec::new();
        if x > 0 {
            nb.push(i - 1);
        }
        if x + 1 < w {
            nb.push(i + 1);
        }
        if y > 0 {
            nb.push(i - w);
        }
        if y + 1 < h {
            nb.push(i + w);
        }
        for j in nb {
            if allowed[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Largest component; among equal sizes the one found first in row-major
/// order.
pub fn largest_component(set: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut taken = vec![false; w * h];
    let mut best: Vec<bool> = vec![false; w * h];
    let mut best_size = 0;
    for i in 0..w * h {
        if set[i] && !taken[i] {
            let mut seed = vec![false; w * h];
            seed[i] = true;
            let comp = flood(set, &seed, w, h);
            let size = comp.iter().filter(|&&b| b).count();
            for (t, &c) in taken.iter_mut().zip(&comp) {
                *t |= c;
            }
            if size > best_size {
                best_size = size;
                best = comp;
            }
        }
    }
    best
}

pub fn connectivity_error(
    pred: &PixelMap,
    gt: &PixelMap,
    region: &EvalMask,
    step: f64,
    theta: f64,
) -> Option<f64> {
    let (w, h) = pred.dims();
    let top = 1.0 - step;
    let both: Vec<bool> = (0..w * h)
        .map(|i| pred.data()[i] as f64 >= top && gt.data()[i] as f64 >= top)
        .collect();
    let omega = largest_component(&both, w, h);
    if !omega.iter().any(|&b| b) {
        return None;
    }
    let mut thresholds = Vec::new();
    let mut k = 0;
    loop {
        let t = k as f64 * step;
        if t > top + 1e-9 {
            break;
        }
        thresholds.push(t);
        k += 1;
    }
    let phi = |m: &PixelMap| -> Vec<f64> {
        let mut level = vec![0.0; w * h];
        for &t in &thresholds {
            let allowed: Vec<bool> = m.data().iter().map(|&v| v as f64 >= t).collect();
            let reach = flood(&allowed, &omega, w, h);
            for i in 0..w * h {
                if reach[i] {
                    level[i] = t;
                }
            }
        }
        (0..w * h)
            .map(|i| {
                let d = m.data()[i] as f64 - level[i];
                if d >= theta {
                    1.0 - d
                } else {
                    1.0
                }
            })
            .collect()
    };
    let (pp, gp) = (phi(pred), phi(gt));
    let mut acc = 0.0;
    for i in 0..w * h {
        if region.data()[i] {
            acc += (pp[i] - gp[i]).abs();
        }
    }
    Some(acc)
}

// ---------------------------------------------------------------- trimap

/// Pixels of `region` whose squared distance to every non-region pixel
/// (including a one-pixel frame around the image) exceeds `r²`.
pub fn eroded(region: &[bool], w: usize, h: usize, r: u32) -> Vec<bool> {
    let mut outside: Vec<(isize, isize)> = Vec::new();
    for y in -1..=h as isize {
        for x in -1..=w as isize {
            let inside_frame = x >= 0 && y >= 0 && x < w as isize && y < h as isize;
            if !inside_frame || !region[y as usize * w + x as usize] {
                outside.push((x, y));
            }
        }
    }
    let r2 = (r as i64) * (r as i64);
    (0..w * h)
        .map(|i| {
            if !region[i] {
                return false;
            }
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            outside.iter().all(|&(ox, oy)| {
                let (dx, dy) = ((ox - x) as i64, (oy - y) as i64);
                dx * dx + dy * dy > r2
            })
        })
        .collect()
}

/// Value at offset `(dx, dy)` of the normalized, `⌈3σ⌉`-truncated 2-D
/// Gaussian.
pub fn gaussian_2d(dx: isize, dy: isize, sigma: f64) -> f64 {
    let r = (3.0 * sigma).ceil() as isize;
    if dx.abs() > r || dy.abs() > r {
        return 0.0;
    }
    let g = |t: isize| (-((t * t) as f64) / (2.0 * sigma * sigma)).exp();
    let mut z = 0.0;
    for i in -r..=r {
        for j in -r..=r {
            z += g(i) * g(j);
        }
    }
    g(dx) * g(dy) / z
}

// ---------------------------------------------------------- compositing

/// `a·F + (1 − a)·B` per channel, evaluated in `f64`.
pub fn composite_px(a: f64, f: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|c| a * f[c] + (1.0 - a) * b[c])
}

/// Layer 1 over layer 2: returns `(α, F)`.
pub fn over(a1: f64, f1: [f64; 3], a2: f64, f2: [f64; 3]) -> (f64, [f64; 3]) {
    let a = a1 + a2 * (1.0 - a1);
    if a <= 0.0 {
        return (0.0, f1);
    }
    let f = [0, 1, 2].map(|c| (a1 * f1[c] + (1.0 - a1) * a2 * f2[c]) / a);
    (a, f)
}
