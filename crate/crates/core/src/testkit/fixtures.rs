//! Synthetic masks and images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{CategoricalMask, ImageBuffer, Raster};
use crate::warp::raster_center;

fn mask_from_fn(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> CategoricalMask {
    let data = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| if f(x, y) { 255 } else { 0 })
        .collect();
    CategoricalMask::binary(w, h, data).expect("binary")
}

/// Foreground disk of `radius` about the raster center.
pub fn disk_mask(w: usize, h: usize, radius: f64) -> CategoricalMask {
    let (cx, cy) = raster_center(w, h);
    mask_from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        dx * dx + dy * dy <= radius * radius
    })
}

pub fn checkerboard_mask(w: usize, h: usize, cell: usize) -> CategoricalMask {
    mask_from_fn(w, h, |x, y| (x / cell + y / cell).is_multiple_of(2))
}

/// Foreground in columns `0..split`.
pub fn column_split(w: usize, h: usize, split: usize) -> CategoricalMask {
    mask_from_fn(w, h, |x, _| x < split)
}

/// Union of a few random disks.
pub fn blob_mask(w: usize, h: usize, seed: u64) -> CategoricalMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..6);
    let scale = w.min(h) as f64;
    let blobs: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(0.08..0.3) * scale,
            )
        })
        .collect();
    mask_from_fn(w, h, |x, y| {
        blobs.iter().any(|&(bx, by, r)| {
            let (dx, dy) = (x as f64 - bx, y as f64 - by);
            dx * dx + dy * dy <= r * r
        })
    })
}

pub fn constant_mask(w: usize, h: usize, value: u8) -> CategoricalMask {
    CategoricalMask::binary(w, h, vec![value; w * h]).expect("binary")
}

/// The five shape families used by the binary-closure checks.
pub fn closure_masks(w: usize, h: usize, seed: u64) -> Vec<(&'static str, CategoricalMask)> {
    vec![
        ("disk", disk_mask(w, h, w.min(h) as f64 / 3.0)),
        ("checkerboard", checkerboard_mask(w, h, 5)),
        ("blobs", blob_mask(w, h, seed)),
        ("all-0", constant_mask(w, h, 0)),
        ("all-255", constant_mask(w, h, 255)),
    ]
}

/// Single-channel image with the mask's values.
pub fn image_from_mask(mask: &CategoricalMask) -> ImageBuffer {
    ImageBuffer::new(mask.width(), mask.height(), 1, mask.data().to_vec()).expect("same shape")
}

pub fn random_image(w: usize, h: usize, channels: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * channels).map(|_| rng.random()).collect();
    ImageBuffer::new(w, h, channels, data).expect("shape")
}

/// Smooth textured grayscale image plus a blob mask, standing in for a
/// photograph and its annotation.
pub fn synthetic_pair(w: usize, h: usize, seed: u64) -> (ImageBuffer, CategoricalMask) {
    let mask = blob_mask(w, h, seed);
    let phase = (seed % 17) as f64;
    let img = ImageBuffer::from_fn(w, h, 1, |x, y, _| {
        let base = 60.0 + 40.0 * ((x as f64 + phase) / 9.0).sin() * ((y as f64) / 13.0).cos();
        let lift = if mask.get(x, y) == 255 { 100.0 } else { 0.0 };
        (base + lift).clamp(0.0, 255.0) as u8
    })
    .expect("shape");
    (img, mask)
}

/// 4x4 pair: ground-truth foreground is the left two columns, prediction
/// foreground the top two rows. Returns `(pred, gt)`.
pub fn hand_counted_pair() -> (CategoricalMask, CategoricalMask) {
    (mask_from_fn(4, 4, |_, y| y < 2), column_split(4, 4, 2))
}
