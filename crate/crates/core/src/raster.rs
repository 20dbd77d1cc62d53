//! Raster value types.
//!
//! All rasters store 8-bit samples row-major with channels interleaved, so
//! the `[0, 255]` range invariant holds by construction. Interpolation math
//! happens in `f64` and is converted back by [`crate::resample`].

use crate::error::{Error, Result};
use crate::labels::LabelMap;

/// Read-only view shared by every raster type.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn channels(&self) -> usize {
        1
    }
    fn data(&self) -> &[u8];

    fn dimensions(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }
}

fn check_len(expected: usize, data: &[u8]) -> Result<()> {
    if data.len() != expected {
        return Err(Error::DataLength {
            expected,
            actual: data.len(),
        });
    }
    Ok(())
}

/// Intensity raster with one or three channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Channels(channels));
        }
        check_len(width * height * channels, &data)?;
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds a raster by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

impl Raster for ImageBuffer {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn channels(&self) -> usize {
        self.channels
    }
    fn data(&self) -> &[u8] {
        &self.data
    }
}

/// Single-channel mask whose values all belong to a label map's pixel set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoricalMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl CategoricalMask {
    /// Validates every value against `map`.
    pub fn new(width: usize, height: usize, data: Vec<u8>, map: &LabelMap) -> Result<Self> {
        check_len(width * height, &data)?;
        if let Some(i) = data.iter().position(|&v| map.label_of(v).is_none()) {
            return Err(Error::UnmappedValue {
                value: data[i],
                x: i % width,
                y: i / width,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Mask under the default two-class `{0, 255}` encoding.
    pub fn binary(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, data, &LabelMap::binary())
    }

    /// Caller guarantees every value is a class value.
    pub(crate) fn from_trusted(width: usize, height: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Reinterprets the mask as a plain raster, e.g. before warping.
    pub fn to_transformed(&self) -> TransformedMask {
        TransformedMask {
            width: self.width,
            height: self.height,
            data: self.data.clone(),
        }
    }
}

impl Raster for CategoricalMask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn data(&self) -> &[u8] {
        &self.data
    }
}

/// Mask after warping and before filtering; any value in `[0, 255]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransformedMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl TransformedMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_len(width * height, &data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// True when every value is `0` or `255`.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0 || v == 255)
    }

    /// Number of values strictly between the two class values.
    pub fn intermediate_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0 && v != 255).count()
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

impl Raster for TransformedMask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn data(&self) -> &[u8] {
        &self.data
    }
}
