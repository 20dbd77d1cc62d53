//! Brute-force reference implementations.
//!
//! These evaluate the defining formulas directly, per pixel, with their own
//! kernels and neighborhood logic. They share only the raster types and the
//! matrix inverse with the production code.

use crate::labels::LabelMap;
use crate::raster::{CategoricalMask, Raster};
use crate::resample::InterpMethod;
use crate::warp::AffineTransform;

fn snap(c: f64) -> f64 {
    if (c - c.round()).abs() < 1e-9 {
        c.round()
    } else {
        c
    }
}

fn tent(d: f64) -> f64 {
    (1.0 - d.abs()).max(0.0)
}

fn keys(d: f64) -> f64 {
    let a = -0.5;
    let d = d.abs();
    if d <= 1.0 {
        (a + 2.0) * d.powi(3) - (a + 3.0) * d.powi(2) + 1.0
    } else if d < 2.0 {
        a * d.powi(3) - 5.0 * a * d.powi(2) + 8.0 * a * d - 4.0 * a
    } else {
        0.0
    }
}

/// Warps `src` by `forward` with inverse mapping, evaluating the chosen
/// kernel as a direct 2-D weighted sum over its support.
pub fn warp(src: &impl Raster, forward: &AffineTransform, method: InterpMethod, fill: u8) -> Vec<u8> {
    let inv = forward.invert().expect("invertible");
    let [[a, b, c], [d, e, f]] = inv.rows();
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    let px = |x: i64, y: i64, k: usize| {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        src.data()[(y * w + x) * ch + k] as f64
    };
    let mut out = Vec::with_capacity(w * h * ch);
    for y in 0..h {
        for x in 0..w {
            let (xf, yf) = (x as f64, y as f64);
            let u = snap(a * xf + b * yf + c);
            let v = snap(d * xf + e * yf + f);
            let inside = u >= 0.0 && u <= (w - 1) as f64 && v >= 0.0 && v <= (h - 1) as f64;
            for k in 0..ch {
                if !inside {
                    out.push(fill);
                    continue;
                }
                let value = match method {
                    InterpMethod::Nearest => px(u.round() as i64, v.round() as i64, k),
                    InterpMethod::Bilinear => direct_sum(u, v, 0, 1, tent, |i, j| px(i, j, k)),
                    InterpMethod::Bicubic => direct_sum(u, v, -1, 2, keys, |i, j| px(i, j, k)),
                };
                out.push(value.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

fn direct_sum(u: f64, v: f64, lo: i64, hi: i64, kernel: fn(f64) -> f64, px: impl Fn(i64, i64) -> f64) -> f64 {
    let (x0, y0) = (u.floor() as i64, v.floor() as i64);
    let mut sum = 0.0;
    for j in y0 + lo..=y0 + hi {
        let wy = kernel(j as f64 - v);
        for i in x0 + lo..=x0 + hi {
            sum += kernel(i as f64 - u) * wy * px(i, j);
        }
    }
    sum
}

fn boundary(mask: &CategoricalMask, class: u8) -> Vec<(i64, i64)> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let at = |x: i64, y: i64| mask.data()[(y * w + x) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if at(x, y) != class {
                continue;
            }
            let neighbors = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
            if neighbors
                .iter()
                .any(|&(nx, ny)| nx >= 0 && ny >= 0 && nx < w && ny < h && at(nx, ny) != class)
            {
                out.push((x, y));
            }
        }
    }
    out
}

fn within(points: &[(i64, i64)], targets: &[(i64, i64)], theta: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let hits = points
        .iter()
        .filter(|&&(x, y)| {
            targets
                .iter()
                .map(|&(tx, ty)| (((x - tx).pow(2) + (y - ty).pow(2)) as f64).sqrt())
                .any(|d| d <= theta)
        })
        .count();
    hits as f64 / points.len() as f64
}

/// Boundary F1 by exhaustive nearest-boundary search.
pub fn bf1(pred: &CategoricalMask, gt: &CategoricalMask, class: u8, theta: f64) -> f64 {
    let pb = boundary(pred, class);
    let gb = boundary(gt, class);
    if pb.is_empty() && gb.is_empty() {
        return 1.0;
    }
    let p = within(&pb, &gb, theta);
    let r = within(&gb, &pb, theta);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn mean_bf_score(pred: &CategoricalMask, gt: &CategoricalMask, map: &LabelMap, theta: f64) -> f64 {
    let scores: Vec<f64> = map.entries().iter().map(|&(_, v)| bf1(pred, gt, v, theta)).collect();
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Rank of each score as `1 + #greater + (#equal - 1) / 2`.
pub fn mid_ranks(scores: &[f64]) -> Vec<f64> {
    scores
        .iter()
        .map(|&s| {
            let greater = scores.iter().filter(|&&o| o > s).count() as f64;
            let equal = scores.iter().filter(|&&o| o == s).count() as f64;
            1.0 + greater + (equal - 1.0) / 2.0
        })
        .collect()
}
