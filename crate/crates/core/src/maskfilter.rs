//! Mean-based global filter for warped binary masks.
//!
//! With `mu` the mean of every value in the warped mask `P`, each pixel is
//! resolved by the first matching rule:
//!
//! 1. `P(x, y)` is already `0` or `255`: keep it.
//! 2. `P(x, y) > mu`: `255`.
//! 3. otherwise (`P(x, y) <= mu`): `0`.
//!
//! Rule 1 matters for the all-255 raster, where `mu = 255` and rule 2 alone
//! would send every pixel to background.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CategoricalMask, Raster, TransformedMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub mu: f64,
    pub changed: usize,
}

pub fn global_filter(p: &TransformedMask) -> Result<(CategoricalMask, FilterStats)> {
    if p.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let sum: u64 = p.data().iter().map(|&v| v as u64).sum();
    let mu = sum as f64 / p.data().len() as f64;
    let mut changed = 0;
    let data = p
        .data()
        .iter()
        .map(|&v| {
            let out = match v {
                0 | 255 => v,
                _ if v as f64 > mu => 255,
                _ => 0,
            };
            changed += usize::from(out != v);
            out
        })
        .collect();
    Ok((
        CategoricalMask::from_trusted(p.width(), p.height(), data),
        FilterStats { mu, changed },
    ))
}
