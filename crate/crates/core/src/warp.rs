//! Affine transforms and the inverse-mapping warp.
//!
//! Every output pixel is inverse-mapped into the source and sampled there.
//! The mask path takes the same interpolation choice as the image path; it is
//! not pinned to nearest neighbor, so a warped mask may contain any value in
//! `[0, 255]` until it goes through [`crate::maskfilter::global_filter`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CategoricalMask, ImageBuffer, Raster, TransformedMask};
use crate::resample::{BoundaryPolicy, InterpMethod, Sampler};

/// Geometric augmentation parameters. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransformParams {
    pub rotation: f64,
    pub shear_h: f64,
    pub shear_v: f64,
    pub tx: f64,
    pub ty: f64,
    pub scale: f64,
}

impl TransformParams {
    pub const NEUTRAL: TransformParams = TransformParams {
        rotation: 0.0,
        shear_h: 0.0,
        shear_v: 0.0,
        tx: 0.0,
        ty: 0.0,
        scale: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.rotation,
            self.shear_h,
            self.shear_v,
            self.tx,
            self.ty,
            self.scale,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::TransformParams("non-finite value".into()));
        }
        if self.scale <= 0.0 {
            return Err(Error::TransformParams(format!("scale {} must be > 0", self.scale)));
        }
        Ok(())
    }
}

impl Default for TransformParams {
    fn default() -> Self {
        Self::NEUTRAL
    }
}

/// Homogeneous 2-D affine map; the implicit bottom row is `0 0 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    m: [[f64; 3]; 2],
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub fn from_rows(rows: [[f64; 3]; 2]) -> Self {
        Self { m: rows }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::from_rows([[1.0, 0.0, tx], [0.0, 1.0, ty]])
    }

    pub fn scaling(sx: f64, sy: f64) -> Self {
        Self::from_rows([[sx, 0.0, 0.0], [0.0, sy, 0.0]])
    }

    /// Rotation by `degrees`; with `y` pointing down this turns clockwise on
    /// screen.
    pub fn rotation(degrees: f64) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        Self::from_rows([[c, -s, 0.0], [s, c, 0.0]])
    }

    /// `x' = x + tan(angle) * y`
    pub fn shear_h(degrees: f64) -> Self {
        Self::from_rows([[1.0, degrees.to_radians().tan(), 0.0], [0.0, 1.0, 0.0]])
    }

    /// `y' = y + tan(angle) * x`
    pub fn shear_v(degrees: f64) -> Self {
        Self::from_rows([[1.0, 0.0, 0.0], [degrees.to_radians().tan(), 1.0, 0.0]])
    }

    /// Full 3x3 matrix.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [self.m[0], self.m[1], [0.0, 0.0, 1.0]]
    }

    pub fn rows(&self) -> [[f64; 3]; 2] {
        self.m
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self ∘ other`: applies `other` first.
    pub fn then_after(&self, other: &AffineTransform) -> AffineTransform {
        let a = &self.m;
        let b = &other.m;
        let mut m = [[0.0; 3]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
            row[2] += a[r][2];
        }
        AffineTransform { m }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.m[0][0] * x + self.m[0][1] * y + self.m[0][2],
            self.m[1][0] * x + self.m[1][1] * y + self.m[1][2],
        )
    }

    pub fn invert(&self) -> Result<AffineTransform> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularTransform(det));
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let ia = d / det;
        let ib = -b / det;
        let ic = -c / det;
        let id = a / det;
        Ok(AffineTransform::from_rows([
            [ia, ib, -(ia * tx + ib * ty)],
            [ic, id, -(ic * tx + id * ty)],
        ]))
    }

    /// Max absolute entry difference.
    pub fn max_abs_diff(&self, other: &AffineTransform) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Image center in pixel-center coordinates.
pub fn raster_center(width: usize, height: usize) -> (f64, f64) {
    ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0)
}

/// Scale, rotate, shear horizontally, shear vertically (all about `center`),
/// then translate. Maps source coordinates to destination coordinates.
pub fn compose(params: &TransformParams, center: (f64, f64)) -> Result<AffineTransform> {
    params.validate()?;
    let (cx, cy) = center;
    let t = AffineTransform::translation(params.tx, params.ty)
        .then_after(&AffineTransform::translation(cx, cy))
        .then_after(&AffineTransform::shear_v(params.shear_v))
        .then_after(&AffineTransform::shear_h(params.shear_h))
        .then_after(&AffineTransform::rotation(params.rotation))
        .then_after(&AffineTransform::scaling(params.scale, params.scale))
        .then_after(&AffineTransform::translation(-cx, -cy));
    let det = t.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularTransform(det));
    }
    Ok(t)
}

/// Samples `src` onto a `width x height` grid where each output pixel
/// `(x, y)` reads from `inverse.apply(x, y)`.
pub(crate) fn warp_plane<R: Raster + ?Sized>(
    src: &R,
    inverse: &AffineTransform,
    width: usize,
    height: usize,
    method: InterpMethod,
    fill: u8,
) -> Vec<u8> {
    let channels = src.channels();
    let sampler = Sampler::new(src);
    let mut out = vec![0u8; width * height * channels];
    let m = inverse.m;
    for (y, row) in out.chunks_exact_mut((width * channels).max(1)).enumerate() {
        let yf = y as f64;
        for (x, px) in row.chunks_exact_mut(channels).enumerate() {
            let xf = x as f64;
            let u = m[0][0] * xf + m[0][1] * yf + m[0][2];
            let v = m[1][0] * xf + m[1][1] * yf + m[1][2];
            sampler.sample_into(u, v, method, fill, px);
        }
    }
    out
}

fn inverse_checked(t: &AffineTransform) -> Result<AffineTransform> {
    let inv = t.invert()?;
    let finite = inv.m.iter().flatten().all(|v| v.is_finite());
    if !finite {
        return Err(Error::NonFiniteCoordinate(f64::NAN, f64::NAN));
    }
    Ok(inv)
}

pub fn warp_image(
    img: &ImageBuffer,
    t: &AffineTransform,
    method: InterpMethod,
    policy: BoundaryPolicy,
) -> Result<ImageBuffer> {
    if img.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let inv = inverse_checked(t)?;
    let data = warp_plane(img, &inv, img.width(), img.height(), method, policy.fill);
    ImageBuffer::new(img.width(), img.height(), img.channels(), data)
}

/// Warps a class mask with any interpolation method.
pub fn warp_mask(
    mask: &CategoricalMask,
    t: &AffineTransform,
    method: InterpMethod,
    policy: BoundaryPolicy,
) -> Result<TransformedMask> {
    if mask.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let inv = inverse_checked(t)?;
    let data = warp_plane(mask, &inv, mask.width(), mask.height(), method, policy.fill);
    TransformedMask::new(mask.width(), mask.height(), data)
}
