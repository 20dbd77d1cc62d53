//! Paired image/mask augmentation.
//!
//! One set of geometric parameters is drawn per `(pair, augmentation)` and
//! applied to both rasters about the shared center. The image is warped with
//! the configuration's image method and then brightness-scaled; the mask is
//! warped with the mask method and then resolved by the global filter, so the
//! returned mask always holds only class values.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskfilter::{global_filter, FilterStats};
use crate::raster::{CategoricalMask, ImageBuffer, Raster, TransformedMask};
use crate::resample::{quantize, BoundaryPolicy, InterpMethod};
use crate::warp::{compose, raster_center, warp_image, warp_mask, TransformParams};

/// `(image method, mask method)`, named `IMG_MASK`, e.g. `NEA_BIC` is
/// nearest for images and bicubic for masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct InterpConfig {
    pub image: InterpMethod,
    pub mask: InterpMethod,
}

impl InterpConfig {
    pub const NEA_NEA: InterpConfig = InterpConfig::new(InterpMethod::Nearest, InterpMethod::Nearest);
    pub const BIC_BIC: InterpConfig = InterpConfig::new(InterpMethod::Bicubic, InterpMethod::Bicubic);
    pub const BIL_BIL: InterpConfig = InterpConfig::new(InterpMethod::Bilinear, InterpMethod::Bilinear);
    pub const NEA_BIC: InterpConfig = InterpConfig::new(InterpMethod::Nearest, InterpMethod::Bicubic);
    pub const NEA_BIL: InterpConfig = InterpConfig::new(InterpMethod::Nearest, InterpMethod::Bilinear);

    /// The five configurations compared in the experiments.
    pub const STANDARD: [InterpConfig; 5] = [
        Self::NEA_NEA,
        Self::BIC_BIC,
        Self::BIL_BIL,
        Self::NEA_BIC,
        Self::NEA_BIL,
    ];

    pub const fn new(image: InterpMethod, mask: InterpMethod) -> Self {
        Self { image, mask }
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.image.abbrev(), self.mask.abbrev())
    }
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self::BIC_BIC
    }
}

impl fmt::Display for InterpConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.image, self.mask)
    }
}

impl FromStr for InterpConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (image, mask) = s
            .split_once('_')
            .ok_or_else(|| Error::Config(format!("interpolation config {s:?} is not IMG_MASK")))?;
        Ok(Self::new(image.parse()?, mask.parse()?))
    }
}

impl TryFrom<String> for InterpConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InterpConfig> for String {
    fn from(c: InterpConfig) -> String {
        c.name()
    }
}

/// Augmentation ranges, interpolation choice and seed. Serialized as JSON
/// with kebab-case keys; missing keys take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub x_translation_range: [f64; 2],
    pub y_translation_range: [f64; 2],
    pub shear_h_range: [f64; 2],
    pub shear_v_range: [f64; 2],
    pub rotation_range: [f64; 2],
    pub scale_range: [f64; 2],
    pub brightness_set: Vec<f64>,
    pub interp: InterpConfig,
    pub seed: u64,
    pub augmentations_per_pair: usize,
    pub fill_value: u8,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            x_translation_range: [-10.0, 10.0],
            y_translation_range: [-10.0, 10.0],
            shear_h_range: [-15.0, 15.0],
            shear_v_range: [-15.0, 15.0],
            rotation_range: [-45.0, 45.0],
            scale_range: [0.8, 1.2],
            brightness_set: vec![0.9, 0.95, 1.0, 1.05, 1.1],
            interp: InterpConfig::default(),
            seed: 0,
            augmentations_per_pair: 1,
            fill_value: 0,
        }
    }
}

impl AugmentConfig {
    /// Every range collapsed to its neutral point.
    pub fn neutral() -> Self {
        Self {
            x_translation_range: [0.0, 0.0],
            y_translation_range: [0.0, 0.0],
            shear_h_range: [0.0, 0.0],
            shear_v_range: [0.0, 0.0],
            rotation_range: [0.0, 0.0],
            scale_range: [1.0, 1.0],
            brightness_set: vec![1.0],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("x-translation-range", self.x_translation_range),
            ("y-translation-range", self.y_translation_range),
            ("shear-h-range", self.shear_h_range),
            ("shear-v-range", self.shear_v_range),
            ("rotation-range", self.rotation_range),
            ("scale-range", self.scale_range),
        ];
        for (name, [lo, hi]) in ranges {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::Config(format!("{name} [{lo}, {hi}] is not a valid range")));
            }
        }
        if self.scale_range[0] <= 0.0 {
            return Err(Error::Config("scale-range must be strictly positive".into()));
        }
        for name_range in [self.shear_h_range, self.shear_v_range] {
            if name_range[0] <= -90.0 || name_range[1] >= 90.0 {
                return Err(Error::Config("shear angles must lie in (-90, 90)".into()));
            }
        }
        if self.brightness_set.is_empty() {
            return Err(Error::Config("brightness-set is empty".into()));
        }
        if self.brightness_set.iter().any(|&b| !(b.is_finite() && b > 0.0)) {
            return Err(Error::Config("brightness factors must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn policy(&self) -> BoundaryPolicy {
        BoundaryPolicy::fill(self.fill_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SampledAugmentation {
    pub params: TransformParams,
    pub brightness: f64,
}

impl SampledAugmentation {
    pub const NEUTRAL: SampledAugmentation = SampledAugmentation {
        params: TransformParams::NEUTRAL,
        brightness: 1.0,
    };
}

/// Independent stream per `(seed, pair, aug)`: the triple is the ChaCha key.
fn stream_rng(seed: u64, pair_index: u64, aug_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&pair_index.to_le_bytes());
    key[16..24].copy_from_slice(&aug_index.to_le_bytes());
    key[24..].copy_from_slice(b"epiaugSA");
    ChaCha8Rng::from_seed(key)
}

pub fn sample_params(
    config: &AugmentConfig,
    pair_index: usize,
    aug_index: usize,
) -> Result<SampledAugmentation> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, pair_index as u64, aug_index as u64);
    let mut draw = |[lo, hi]: [f64; 2]| rng.random_range(lo..=hi);
    let rotation = draw(config.rotation_range);
    let shear_h = draw(config.shear_h_range);
    let shear_v = draw(config.shear_v_range);
    let tx = draw(config.x_translation_range);
    let ty = draw(config.y_translation_range);
    let scale = draw(config.scale_range);
    let brightness = config.brightness_set[rng.random_range(0..config.brightness_set.len())];
    Ok(SampledAugmentation {
        params: TransformParams {
            rotation,
            shear_h,
            shear_v,
            tx,
            ty,
            scale,
        },
        brightness,
    })
}

/// Scales every sample by `factor` (expected positive), rounding half away
/// from zero and clamping.
pub fn apply_brightness(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    if factor == 1.0 {
        return img.clone();
    }
    let data = img.data().iter().map(|&v| quantize(v as f64 * factor)).collect();
    ImageBuffer::new(img.width(), img.height(), img.channels(), data)
        .expect("same shape as input")
}

/// Augmented pair plus the unfiltered mask, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedAugmentation {
    pub image: ImageBuffer,
    pub mask: CategoricalMask,
    pub pre_filter: TransformedMask,
    pub filter_stats: FilterStats,
}

pub fn augment_pair_traced(
    img: &ImageBuffer,
    mask: &CategoricalMask,
    s: &SampledAugmentation,
    config: &AugmentConfig,
) -> Result<TracedAugmentation> {
    if img.dimensions() != mask.dimensions() {
        return Err(Error::mismatch(img.dimensions(), mask.dimensions()));
    }
    let center = raster_center(img.width(), img.height());
    let t = compose(&s.params, center)?;
    let warped = warp_image(img, &t, config.interp.image, config.policy())?;
    let image = apply_brightness(&warped, s.brightness);
    let pre_filter = warp_mask(mask, &t, config.interp.mask, config.policy())?;
    let (mask, filter_stats) = global_filter(&pre_filter)?;
    Ok(TracedAugmentation {
        image,
        mask,
        pre_filter,
        filter_stats,
    })
}

pub fn augment_pair(
    img: &ImageBuffer,
    mask: &CategoricalMask,
    s: &SampledAugmentation,
    config: &AugmentConfig,
) -> Result<(ImageBuffer, CategoricalMask)> {
    augment_pair_traced(img, mask, s, config).map(|t| (t.image, t.mask))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub pair_index: usize,
    pub aug_index: usize,
    pub sample: SampledAugmentation,
    pub image: ImageBuffer,
    pub mask: CategoricalMask,
}

/// Augments every pair `augmentations_per_pair` times on the current rayon
/// pool. Output is ordered by `(pair_index, aug_index)`.
pub fn augment_dataset(
    pairs: &[(ImageBuffer, CategoricalMask)],
    config: &AugmentConfig,
) -> Result<Vec<AugmentedPair>> {
    config.validate()?;
    for (index, (img, mask)) in pairs.iter().enumerate() {
        if img.dimensions() != mask.dimensions() {
            return Err(Error::Pair {
                index,
                source: Box::new(Error::mismatch(img.dimensions(), mask.dimensions())),
            });
        }
    }
    let per_pair = config.augmentations_per_pair;
    let results: Vec<Result<AugmentedPair>> = (0..pairs.len() * per_pair)
        .into_par_iter()
        .map(|flat| {
            let (pair_index, aug_index) = (flat / per_pair, flat % per_pair);
            let (img, mask) = &pairs[pair_index];
            let run = || {
                let sample = sample_params(config, pair_index, aug_index)?;
                let (image, mask) = augment_pair(img, mask, &sample, config)?;
                Ok(AugmentedPair {
                    pair_index,
                    aug_index,
                    sample,
                    image,
                    mask,
                })
            };
            run().map_err(|e| Error::Pair {
                index: pair_index,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// [`augment_dataset`] on a dedicated pool of `workers` threads.
pub fn augment_dataset_with_workers(
    pairs: &[(ImageBuffer, CategoricalMask)],
    config: &AugmentConfig,
    workers: usize,
) -> Result<Vec<AugmentedPair>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| augment_dataset(pairs, config))
}
