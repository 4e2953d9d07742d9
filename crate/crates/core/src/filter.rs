//! Separable filtering and resampling shared by the pyramid, trimap,
//! metric and augmentation code.

use crate::maps::PixelMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Half-sample symmetric reflection: `-1 -> 0`, `-2 -> 1`, `n -> n-1`.
    Reflect,
    /// Edge replication.
    Replicate,
}

impl Border {
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Border::Reflect => {
                let m = i.rem_euclid(2 * n);
                (if m < n { m } else { 2 * n - 1 - m }) as usize
            }
            Border::Replicate => i.clamp(0, n - 1) as usize,
        }
    }
}

/// Correlates every row with `kernel` (centered, odd length).
pub fn filter_rows(src: &PixelMap, kernel: &[f64], border: Border) -> PixelMap {
    let (w, h) = src.dims();
    let r = (kernel.len() / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = &src.data()[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f64;
            for (k, &kv) in kernel.iter().enumerate() {
                let xi = border.index(x as isize + k as isize - r, w);
                acc += kv * row[xi] as f64;
            }
            out.push(acc as f32);
        }
    }
    PixelMap::new(w, h, out)
}

/// Correlates every column with `kernel` (centered, odd length).
pub fn filter_cols(src: &PixelMap, kernel: &[f64], border: Border) -> PixelMap {
    let (w, h) = src.dims();
    let r = (kernel.len() / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (k, &kv) in kernel.iter().enumerate() {
                let yi = border.index(y as isize + k as isize - r, h);
                acc += kv * src.data()[yi * w + x] as f64;
            }
            out.push(acc as f32);
        }
    }
    PixelMap::new(w, h, out)
}

pub fn separable(src: &PixelMap, kx: &[f64], ky: &[f64], border: Border) -> PixelMap {
    filter_cols(&filter_rows(src, kx, border), ky, border)
}

/// Sampled, unit-sum Gaussian truncated at `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Bilinear resampling to `(out_w, out_h)` with pixel-center alignment
/// and edge clamping.
pub fn resize_bilinear(src: &PixelMap, out_w: usize, out_h: usize) -> PixelMap {
    let (w, h) = src.dims();
    if (w, h) == (out_w, out_h) {
        return src.clone();
    }
    let sx = w as f64 / out_w as f64;
    let sy = h as f64 / out_h as f64;
    let taps = |o: usize, scale: f64, n: usize| {
        let p = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = p.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, p - i0 as f64)
    };
    let xt: Vec<_> = (0..out_w).map(|x| taps(x, sx, w)).collect();
    let mut out = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let (y0, y1, fy) = taps(oy, sy, h);
        for &(x0, x1, fx) in &xt {
            let v00 = src.get(x0, y0) as f64;
            let v10 = src.get(x1, y0) as f64;
            let v01 = src.get(x0, y1) as f64;
            let v11 = src.get(x1, y1) as f64;
            let top = v00 + (v10 - v00) * fx;
            let bot = v01 + (v11 - v01) * fx;
            out.push((top + (bot - top) * fy) as f32);
        }
    }
    PixelMap::new(out_w, out_h, out)
}

/// Nearest-neighbour resampling with the same alignment as
/// [`resize_bilinear`]; returns source indices for each output pixel.
pub fn nearest_indices(w: usize, h: usize, out_w: usize, out_h: usize) -> Vec<usize> {
    let sx = w as f64 / out_w as f64;
    let sy = h as f64 / out_h as f64;
    let pick = |o: usize, s: f64, n: usize| (((o as f64 + 0.5) * s).floor() as usize).min(n - 1);
    let mut idx = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let y = pick(oy, sy, h);
        for ox in 0..out_w {
            idx.push(y * w + pick(ox, sx, w));
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_indices() {
        let b = Border::Reflect;
        let got: Vec<usize> = (-3..8).map(|i| b.index(i, 5)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 4, 4, 3, 2]);
        assert_eq!(b.index(-2, 1), 0);
        assert_eq!(b.index(3, 1), 0);
    }

    #[test]
    fn reflect_blur_conserves_mass() {
        let mut m = PixelMap::zeros(9, 7);
        m.set(0, 0, 1.0);
        m.set(8, 3, 1.0);
        let k = gaussian_kernel(2.5);
        let out = separable(&m, &k, &k, Border::Reflect);
        let s: f64 = out.data().iter().map(|&v| v as f64).sum();
        assert!((s - 2.0).abs() < 1e-5, "{s}");
    }

    #[test]
    fn bilinear_identity_and_constant() {
        let m = PixelMap::from_fn(5, 4, |x, y| (x * y) as f32);
        assert_eq!(resize_bilinear(&m, 5, 4), m);
        let c = PixelMap::filled(3, 3, 0.25);
        assert!(resize_bilinear(&c, 7, 5).data().iter().all(|&v| v == 0.25));
    }
}
