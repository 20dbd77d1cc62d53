//! Side-by-side panel of an image, its ground truth and two predicted masks.

use anyhow::{ensure, Result};
use epiaug_core::{ImageBuffer, Raster, TransformedMask};

pub const SEPARATOR_WIDTH: usize = 2;
const SEPARATOR_VALUE: u8 = 255;

/// Lays out `image | masks[0] | masks[1] | masks[2]` with white separators.
/// Masks are replicated across channels when the image is RGB.
pub fn composite(image: &ImageBuffer, masks: [&TransformedMask; 3]) -> Result<ImageBuffer> {
    let (w, h) = image.dimensions();
    for m in masks {
        ensure!(
            m.dimensions() == (w, h),
            "mask is {}x{}, image is {w}x{h}",
            m.width(),
            m.height()
        );
    }
    let ch = image.channels();
    let panel = w + SEPARATOR_WIDTH;
    let total = 4 * w + 3 * SEPARATOR_WIDTH;
    let out = ImageBuffer::from_fn(total, h, ch, |x, y, c| {
        let (slot, px) = (x / panel, x % panel);
        if px >= w {
            SEPARATOR_VALUE
        } else if slot == 0 {
            image.get(px, y, c)
        } else {
            masks[slot - 1].get(px, y)
        }
    })?;
    Ok(out)
}
