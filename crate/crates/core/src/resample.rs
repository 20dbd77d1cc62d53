//! Point sampling at fractional coordinates.
//!
//! Pixel centers sit at integer coordinates. A point outside
//! `[0, w-1] x [0, h-1]` takes the fill value; for in-frame points, kernel
//! taps that fall off the raster are clamped to the edge. Interpolated values
//! are rounded half away from zero and clamped to `[0, 255]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Keys cubic convolution parameter.
pub const KEYS_A: f64 = -0.5;

/// Coordinates closer than this to an integer are treated as that integer.
/// Keeps grid-aligned rotations, whose matrices carry `cos(90°) ≈ 6e-17`
/// residue, on the grid.
pub const SNAP_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterpMethod {
    #[serde(rename = "NEA")]
    Nearest,
    #[serde(rename = "BIL")]
    Bilinear,
    #[serde(rename = "BIC")]
    Bicubic,
}

impl InterpMethod {
    pub const ALL: [InterpMethod; 3] = [Self::Nearest, Self::Bilinear, Self::Bicubic];

    pub fn abbrev(self) -> &'static str {
        match self {
            Self::Nearest => "NEA",
            Self::Bilinear => "BIL",
            Self::Bicubic => "BIC",
        }
    }
}

impl fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

impl FromStr for InterpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NEA" | "NEAREST" => Ok(Self::Nearest),
            "BIL" | "BILINEAR" => Ok(Self::Bilinear),
            "BIC" | "BC" | "BICUBIC" => Ok(Self::Bicubic),
            _ => Err(Error::Config(format!("unknown interpolation method {s:?}"))),
        }
    }
}

/// What out-of-frame points sample as.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryPolicy {
    pub fill: u8,
}

impl BoundaryPolicy {
    pub fn fill(fill: u8) -> Self {
        Self { fill }
    }
}

/// Keys cubic kernel with `a = -0.5`.
pub fn keys_kernel(d: f64) -> f64 {
    let d = d.abs();
    if d <= 1.0 {
        ((KEYS_A + 2.0) * d - (KEYS_A + 3.0)) * d * d + 1.0
    } else if d < 2.0 {
        ((KEYS_A * d - 5.0 * KEYS_A) * d + 8.0 * KEYS_A) * d - 4.0 * KEYS_A
    } else {
        0.0
    }
}

/// Weights of taps `floor-1 ..= floor+2` for fractional offset `t` in `[0, 1)`.
pub fn keys_weights(t: f64) -> [f64; 4] {
    [
        keys_kernel(1.0 + t),
        keys_kernel(t),
        keys_kernel(1.0 - t),
        keys_kernel(2.0 - t),
    ]
}

pub fn snap(c: f64) -> f64 {
    let r = c.round();
    if (c - r).abs() < SNAP_EPSILON {
        r
    } else {
        c
    }
}

/// Half away from zero, then clamp.
pub fn quantize(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

/// Samples every channel of `raster` at `(u, v)`.
pub fn sample<R: Raster + ?Sized>(
    raster: &R,
    u: f64,
    v: f64,
    method: InterpMethod,
    policy: BoundaryPolicy,
) -> Result<Vec<u8>> {
    if raster.is_empty() {
        return Err(Error::EmptyRaster);
    }
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::NonFiniteCoordinate(u, v));
    }
    let sampler = Sampler::new(raster);
    let mut out = vec![0; raster.channels()];
    sampler.sample_into(u, v, method, policy.fill, &mut out);
    Ok(out)
}

/// Borrowed raster plus the per-method kernels. Callers have already
/// rejected empty rasters and non-finite coordinates.
pub(crate) struct Sampler<'a> {
    data: &'a [u8],
    width: usize,
    height: usize,
    channels: usize,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new<R: Raster + ?Sized>(raster: &'a R) -> Self {
        Self {
            data: raster.data(),
            width: raster.width(),
            height: raster.height(),
            channels: raster.channels(),
        }
    }

    #[inline]
    fn px(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c] as f64
    }

    #[inline]
    pub(crate) fn sample_into(&self, u: f64, v: f64, method: InterpMethod, fill: u8, out: &mut [u8]) {
        let u = snap(u);
        let v = snap(v);
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(0.0..=max_x).contains(&u) || !(0.0..=max_y).contains(&v) {
            out.fill(fill);
            return;
        }
        match method {
            InterpMethod::Nearest => {
                let x = u.round() as usize;
                let y = v.round() as usize;
                let base = (y * self.width + x) * self.channels;
                out.copy_from_slice(&self.data[base..base + self.channels]);
            }
            InterpMethod::Bilinear => self.bilinear(u, v, out),
            InterpMethod::Bicubic => self.bicubic(u, v, out),
        }
    }

    fn bilinear(&self, u: f64, v: f64, out: &mut [u8]) {
        let x0 = u.floor() as usize;
        let y0 = v.floor() as usize;
        let tx = u - x0 as f64;
        let ty = v - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        for (c, o) in out.iter_mut().enumerate() {
            let top = (1.0 - tx) * self.px(x0, y0, c) + tx * self.px(x1, y0, c);
            let bottom = (1.0 - tx) * self.px(x0, y1, c) + tx * self.px(x1, y1, c);
            *o = quantize((1.0 - ty) * top + ty * bottom);
        }
    }

    fn bicubic(&self, u: f64, v: f64, out: &mut [u8]) {
        let fx = u.floor();
        let fy = v.floor();
        let wx = keys_weights(u - fx);
        let wy = keys_weights(v - fy);
        let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
        let xs: [usize; 4] = std::array::from_fn(|k| clamp(fx as isize - 1 + k as isize, self.width));
        let ys: [usize; 4] = std::array::from_fn(|k| clamp(fy as isize - 1 + k as isize, self.height));
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (&y, &wyj) in ys.iter().zip(&wy) {
                let mut row = 0.0;
                for (&x, &wxi) in xs.iter().zip(&wx) {
                    row += wxi * self.px(x, y, c);
                }
                acc += wyj * row;
            }
            *o = quantize(acc);
        }
    }
}
