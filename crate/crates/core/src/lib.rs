//! Mask-aware geometric augmentation for semantic segmentation.
//!
//! Images and their categorical masks are warped with the same affine
//! transform, but the mask path is not forced onto nearest-neighbor
//! sampling: any of nearest, bilinear or bicubic interpolation may be used,
//! and the resulting non-binary mask is mapped back onto the class values by
//! a mean-threshold global filter. The crate also carries the evaluation
//! side: confusion-based metrics, boundary F1, score ranking and pooled
//! two-sample t-tests.
//!
//! Coordinates follow the usual raster convention: origin at the top-left
//! pixel center, `x` to the right, `y` downward, row-major storage.

pub mod augment;
pub mod datasetio;
pub mod error;
pub mod labels;
pub mod maskfilter;
pub mod metrics;
pub mod raster;
pub mod resample;
pub mod stats;
pub mod warp;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use augment::{
    apply_brightness, augment_dataset, augment_pair, augment_pair_traced, sample_params,
    AugmentConfig, AugmentedPair, InterpConfig, SampledAugmentation, TracedAugmentation,
};
pub use error::{Error, Result};
pub use labels::{labels_to_pixels, pixels_to_labels, LabelGrid, LabelId, LabelMap};
pub use maskfilter::{global_filter, FilterStats};
pub use metrics::{ConfusionCounts, MetricReport};
pub use raster::{CategoricalMask, ImageBuffer, Raster, TransformedMask};
pub use resample::{sample, BoundaryPolicy, InterpMethod};
pub use stats::{rank_scores, sum_ranks, ttest2, RankTable, ScoreTable, TTestResult};
pub use warp::{warp_image, warp_mask, AffineTransform, TransformParams};
