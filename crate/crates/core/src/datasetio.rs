//! Dataset ingestion: PNG pairs on disk, resizing and train/val/test splits.
//!
//! Pairs are matched by file stem between an images directory and a masks
//! directory.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat, ImageReader};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::InterpConfig;
use crate::error::{Error, Result};
use crate::labels::LabelMap;
use crate::maskfilter::{global_filter, FilterStats};
use crate::raster::{CategoricalMask, ImageBuffer, Raster, TransformedMask};
use crate::warp::{warp_plane, AffineTransform};

pub const TRAINING_SIZE: (usize, usize) = (256, 256);
pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.70, 0.15, 0.15);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    #[serde(rename = "pair-id")]
    pub pair_id: String,
    #[serde(rename = "image-path")]
    pub image_path: PathBuf,
    #[serde(rename = "mask-path")]
    pub mask_path: PathBuf,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairManifest {
    pub entries: Vec<PairEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// PNG files in `dir` keyed by stem, sorted.
pub fn png_stems(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png || !path.is_file() {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.push((stem.to_owned(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

impl PairManifest {
    /// Pairs every PNG in `images_dir` with the same-stem PNG in `masks_dir`.
    pub fn discover(images_dir: &Path, masks_dir: &Path) -> Result<Self> {
        let images = png_stems(images_dir)?;
        let masks = png_stems(masks_dir)?;
        let unmatched: Vec<&str> = images
            .iter()
            .map(|(s, _)| s.as_str())
            .filter(|s| !masks.iter().any(|(m, _)| m == s))
            .chain(
                masks
                    .iter()
                    .map(|(s, _)| s.as_str())
                    .filter(|s| !images.iter().any(|(i, _)| i == s)),
            )
            .collect();
        if !unmatched.is_empty() {
            return Err(Error::Config(format!("unmatched stems: {}", unmatched.join(", "))));
        }
        let entries = images
            .into_iter()
            .zip(masks)
            .map(|((pair_id, image_path), (_, mask_path))| PairEntry {
                pair_id,
                image_path,
                mask_path,
                split: None,
            })
            .collect();
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == Some(split)).count()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = csv::Writer::from_writer(file);
        if self.entries.is_empty() {
            w.write_record(["pair-id", "image-path", "mask-path", "split"])?;
        }
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut rdr = csv::Reader::from_reader(file);
        let entries = rdr
            .deserialize()
            .enumerate()
            .map(|(i, r)| {
                r.map_err(|e| Error::Table {
                    row: i + 2,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// Seeded shuffle, then `round(f_train * n)` train, `round(f_val * n)`
/// validation and the remainder test.
pub fn split(manifest: &PairManifest, fractions: (f64, f64, f64), seed: u64) -> Result<PairManifest> {
    if manifest.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let (ft, fv, fs) = fractions;
    if [ft, fv, fs].iter().any(|f| !(0.0..=1.0).contains(f)) || ((ft + fv + fs) - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions {fractions:?} must sum to 1")));
    }
    let n = manifest.len();
    let n_train = ((ft * n as f64).round() as usize).min(n);
    let n_val = ((fv * n as f64).round() as usize).min(n - n_train);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = manifest.clone();
    for (pos, &i) in order.iter().enumerate() {
        out.entries[i].split = Some(if pos < n_train {
            Split::Train
        } else if pos < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        });
    }
    Ok(out)
}

fn decode(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        });
    }
    let img_err = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(img_err)
}

/// Grayscale sources load as one channel, everything else as RGB.
pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => ImageBuffer::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            ImageBuffer::new(w, h, 1, img.to_luma8().into_raw())
        }
        other => ImageBuffer::new(w, h, 3, other.to_rgb8().into_raw()),
    }
}

/// Mask file as a single-channel raster, not yet validated.
pub fn load_mask_raw(path: &Path) -> Result<TransformedMask> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    TransformedMask::new(w, h, img.to_luma8().into_raw())
}

/// Loads and validates a mask; non-conforming binary masks are filtered.
pub fn load_mask(path: &Path, map: &LabelMap) -> Result<(CategoricalMask, Option<FilterStats>)> {
    let raw = load_mask_raw(path)?;
    conform_mask(raw, map, path)
}

fn conform_mask(raw: TransformedMask, map: &LabelMap, path: &Path) -> Result<(CategoricalMask, Option<FilterStats>)> {
    let (w, h) = raw.dimensions();
    match CategoricalMask::new(w, h, raw.data().to_vec(), map) {
        Ok(mask) => Ok((mask, None)),
        Err(e) if !map.is_binary() => Err(e),
        Err(_) => {
            let (mask, stats) = global_filter(&raw)?;
            log::warn!(
                "{}: {} non-class mask values resolved by global filter (mean {:.3})",
                path.display(),
                stats.changed,
                stats.mu
            );
            Ok((mask, Some(stats)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub image: ImageBuffer,
    pub mask: CategoricalMask,
    /// Set when the mask file held non-class values and was filtered.
    pub filtered: Option<FilterStats>,
}

pub fn load_pair(image_path: &Path, mask_path: &Path, map: &LabelMap) -> Result<LoadedPair> {
    let image = load_image(image_path)?;
    let raw = load_mask_raw(mask_path)?;
    if image.dimensions() != raw.dimensions() {
        return Err(Error::mismatch(image.dimensions(), raw.dimensions()));
    }
    let (mask, filtered) = conform_mask(raw, map, mask_path)?;
    Ok(LoadedPair {
        image,
        mask,
        filtered,
    })
}

fn write_png(path: &Path, data: &[u8], width: usize, height: usize, color: ColorType) -> Result<()> {
    image::save_buffer_with_format(path, data, width as u32, height as u32, color, ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let color = if img.channels() == 1 {
        ColorType::L8
    } else {
        ColorType::Rgb8
    };
    write_png(path, img.data(), img.width(), img.height(), color)
}

/// Writes any single-channel raster as 8-bit grayscale.
pub fn save_mask<R: Raster>(path: &Path, mask: &R) -> Result<()> {
    write_png(path, mask.data(), mask.width(), mask.height(), ColorType::L8)
}

/// Corner-aligned scaling onto a `target` grid: source pixel centers
/// `0` and `w-1` land on target `0` and `tw-1`.
fn resize_inverse(src: (usize, usize), target: (usize, usize)) -> AffineTransform {
    let factor = |s: usize, t: usize| {
        if t <= 1 {
            0.0
        } else {
            (s as f64 - 1.0) / (t as f64 - 1.0)
        }
    };
    AffineTransform::scaling(factor(src.0, target.0), factor(src.1, target.1))
}

/// Resizes a pair; the mask is filtered back to class values.
pub fn resize_pair(
    img: &ImageBuffer,
    mask: &CategoricalMask,
    target: (usize, usize),
    interp: InterpConfig,
) -> Result<(ImageBuffer, CategoricalMask)> {
    if target.0 == 0 || target.1 == 0 {
        return Err(Error::Config(format!("resize target {target:?} must be positive")));
    }
    if img.dimensions() != mask.dimensions() {
        return Err(Error::mismatch(img.dimensions(), mask.dimensions()));
    }
    if img.is_empty() {
        return Err(Error::EmptyRaster);
    }
    if img.dimensions() == target {
        return Ok((img.clone(), mask.clone()));
    }
    let inv = resize_inverse(img.dimensions(), target);
    let (tw, th) = target;
    let image = ImageBuffer::new(tw, th, img.channels(), warp_plane(img, &inv, tw, th, interp.image, 0))?;
    let warped = TransformedMask::new(tw, th, warp_plane(mask, &inv, tw, th, interp.mask, 0))?;
    let (mask, _) = global_filter(&warped)?;
    Ok((image, mask))
}
