//! Categorical label ids and their pixel-value encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CategoricalMask, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u8);

impl LabelId {
    pub const BACKGROUND: LabelId = LabelId(0);
    pub const FOREGROUND: LabelId = LabelId(1);
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between label ids and mask pixel values.
///
/// Entry order is significant: the last entry is the positive class that
/// single-class metric summaries report on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    entries: Vec<(LabelId, u8)>,
    by_pixel: [Option<LabelId>; 256],
}

impl LabelMap {
    pub fn new(entries: Vec<(LabelId, u8)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::LabelMap("no entries".into()));
        }
        let mut by_pixel = [None; 256];
        for (i, &(label, pixel)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|&(l, _)| l == label) {
                return Err(Error::LabelMap(format!("duplicate label id {label}")));
            }
            if by_pixel[pixel as usize].is_some() {
                return Err(Error::LabelMap(format!("duplicate pixel value {pixel}")));
            }
            by_pixel[pixel as usize] = Some(label);
        }
        Ok(Self { entries, by_pixel })
    }

    /// `(background, 0), (foreground, 255)`.
    pub fn binary() -> Self {
        Self::new(vec![(LabelId::BACKGROUND, 0), (LabelId::FOREGROUND, 255)])
            .expect("binary map is valid")
    }

    pub fn entries(&self) -> &[(LabelId, u8)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.entries.iter().map(|&(l, _)| l)
    }

    pub fn pixel_of(&self, label: LabelId) -> Option<u8> {
        self.entries
            .iter()
            .find(|&&(l, _)| l == label)
            .map(|&(_, p)| p)
    }

    pub fn label_of(&self, pixel: u8) -> Option<LabelId> {
        self.by_pixel[pixel as usize]
    }

    pub fn positive(&self) -> LabelId {
        self.entries[self.entries.len() - 1].0
    }

    /// Whether this is exactly the two-class `{0, 255}` encoding.
    pub fn is_binary(&self) -> bool {
        self.entries.len() == 2
            && self.label_of(0).is_some()
            && self.label_of(255).is_some()
    }
}

impl Default for LabelMap {
    fn default() -> Self {
        Self::binary()
    }
}

/// Grid of label ids, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<LabelId>,
}

impl LabelGrid {
    pub fn new(width: usize, height: usize, labels: Vec<LabelId>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                actual: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let labels = rows.iter().flat_map(|r| r.iter().map(|&l| LabelId(l))).collect();
        Self::new(width, height, labels)
    }
}

pub fn labels_to_pixels(grid: &LabelGrid, map: &LabelMap) -> Result<CategoricalMask> {
    let data = grid
        .labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            map.pixel_of(label).ok_or(Error::UnknownLabel {
                label: label.0,
                x: i % grid.width,
                y: i / grid.width,
            })
        })
        .collect::<Result<Vec<u8>>>()?;
    CategoricalMask::new(grid.width, grid.height, data, map)
}

pub fn pixels_to_labels(mask: &CategoricalMask, map: &LabelMap) -> Result<LabelGrid> {
    let width = mask.width();
    let labels = mask
        .data()
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            map.label_of(value).ok_or(Error::UnmappedValue {
                value,
                x: i % width,
                y: i / width,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelGrid::new(width, mask.height(), labels)
}
