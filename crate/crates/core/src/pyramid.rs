//! Gaussian / Laplacian pyramids with the 5-tap binomial kernel.
//!
//! Downsampling blurs with `[1 4 6 4 1] / 16` (reflect borders) and keeps
//! even-indexed samples, so a level of size `n` has a child of size
//! `ceil(n / 2)`. Upsampling is bilinear on the child grid, where child
//! sample `j` sits at parent position `2j`, and always lands on the exact
//! parent size.

use crate::error::{Error, Result};
use crate::filter::{separable, Border};
use crate::maps::{ColorMap, PixelMap};

pub const BINOMIAL_5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    levels: Vec<PixelMap>,
    residual: PixelMap,
}

impl LaplacianPyramid {
    /// Assembles a pyramid from parts, checking the size chain.
    pub fn from_parts(levels: Vec<PixelMap>, residual: PixelMap) -> Result<Self> {
        let pyr = Self { levels, residual };
        pyr.check_chain()?;
        Ok(pyr)
    }

    /// Band-pass levels, finest first.
    pub fn levels(&self) -> &[PixelMap] {
        &self.levels
    }

    pub fn residual(&self) -> &PixelMap {
        &self.residual
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn into_parts(self) -> (Vec<PixelMap>, PixelMap) {
        (self.levels, self.residual)
    }

    fn check_chain(&self) -> Result<()> {
        let mut sizes: Vec<(usize, usize)> = self.levels.iter().map(PixelMap::dims).collect();
        sizes.push(self.residual.dims());
        for pair in sizes.windows(2) {
            let (pw, ph) = pair[0];
            if pair[1] != (pw.div_ceil(2), ph.div_ceil(2)) {
                return Err(Error::invalid(
                    "pyramid",
                    format!(
                        "level of {}x{} cannot follow a level of {pw}x{ph}",
                        pair[1].0, pair[1].1
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// One blur-and-decimate step.
pub fn downsample(map: &PixelMap) -> PixelMap {
    let blurred = separable(map, &BINOMIAL_5, &BINOMIAL_5, Border::Reflect);
    let (w, h) = map.dims();
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    PixelMap::from_fn(cw, ch, |x, y| blurred.get(2 * x, 2 * y))
}

/// Bilinear expansion of a child level onto a `width × height` parent grid.
pub fn upsample(child: &PixelMap, width: usize, height: usize) -> PixelMap {
    let (cw, ch) = child.dims();
    let tap = |p: usize, n: usize| {
        let i0 = (p / 2).min(n - 1);
        if p % 2 == 1 && i0 + 1 < n {
            (i0, i0 + 1, true)
        } else {
            (i0, i0, false)
        }
    };
    PixelMap::from_fn(width, height, |x, y| {
        let (x0, x1, hx) = tap(x, cw);
        let (y0, y1, hy) = tap(y, ch);
        match (hx, hy) {
            (false, false) => child.get(x0, y0),
            (true, false) => 0.5 * (child.get(x0, y0) + child.get(x1, y0)),
            (false, true) => 0.5 * (child.get(x0, y0) + child.get(x0, y1)),
            (true, true) => {
                0.25 * (child.get(x0, y0) + child.get(x1, y0) + child.get(x0, y1) + child.get(x1, y1))
            }
        }
    })
}

fn sub(a: &PixelMap, b: &PixelMap) -> PixelMap {
    PixelMap::new(
        a.width(),
        a.height(),
        a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect(),
    )
}

fn add(a: &PixelMap, b: &PixelMap) -> PixelMap {
    PixelMap::new(
        a.width(),
        a.height(),
        a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect(),
    )
}

/// Decomposes `map` into `levels` band-pass levels plus a low-pass residual.
pub fn build_pyramid(map: &PixelMap, levels: usize) -> Result<LaplacianPyramid> {
    if levels == 0 {
        return Err(Error::invalid("levels", "must be at least 1"));
    }
    let (w, h) = map.dims();
    let need = 1usize << (levels - 1);
    if w < need || h < need {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            reason: format!("{levels} pyramid levels need at least {need}x{need}"),
        });
    }
    let mut bands = Vec::with_capacity(levels);
    let mut current = map.clone();
    for _ in 0..levels {
        let low = downsample(&current);
        let up = upsample(&low, current.width(), current.height());
        bands.push(sub(&current, &up));
        current = low;
    }
    Ok(LaplacianPyramid {
        levels: bands,
        residual: current,
    })
}

/// Inverse of [`build_pyramid`].
pub fn reconstruct(pyr: &LaplacianPyramid) -> Result<PixelMap> {
    pyr.check_chain()?;
    let mut current = pyr.residual.clone();
    for band in pyr.levels.iter().rev() {
        let up = upsample(&current, band.width(), band.height());
        current = add(band, &up);
    }
    Ok(current)
}

/// Per-channel pyramids of a color image.
pub fn build_color_pyramid(map: &ColorMap, levels: usize) -> Result<[LaplacianPyramid; 3]> {
    let [r, g, b] = map.channels();
    Ok([
        build_pyramid(&r, levels)?,
        build_pyramid(&g, levels)?,
        build_pyramid(&b, levels)?,
    ])
}
