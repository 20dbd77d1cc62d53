//! Segmentation metrics over categorical masks.
//!
//! Per class: accuracy `TP / (TP + FN)`, IoU `TP / (TP + FP + FN)`, Dice
//! `2TP / (2TP + FP + FN)`, and boundary F1 with a distance tolerance.
//! `MetricReport` carries the positive class's accuracy, IoU and Dice plus
//! the class-averaged boundary F1.
//!
//! A score whose denominator is zero is undefined. Summaries store it as NaN
//! and count it in `MetricReport::undefined`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelId, LabelMap};
use crate::raster::{CategoricalMask, Raster};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    classes: Vec<(LabelId, ClassCounts)>,
}

impl ConfusionCounts {
    pub fn classes(&self) -> &[(LabelId, ClassCounts)] {
        &self.classes
    }

    pub fn get(&self, class: LabelId) -> Option<&ClassCounts> {
        self.classes.iter().find(|(l, _)| *l == class).map(|(_, c)| c)
    }

    fn require(&self, class: LabelId) -> Result<&ClassCounts> {
        self.get(class)
            .ok_or(Error::UnknownLabel { label: class.0, x: 0, y: 0 })
    }
}

fn check_dims(a: &CategoricalMask, b: &CategoricalMask) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::mismatch(a.dimensions(), b.dimensions()));
    }
    Ok(())
}

fn class_index(map: &LabelMap, value: u8, i: usize, width: usize) -> Result<usize> {
    let label = map.label_of(value).ok_or(Error::UnmappedValue {
        value,
        x: i % width.max(1),
        y: i / width.max(1),
    })?;
    Ok(map.labels().position(|l| l == label).expect("label from map"))
}

pub fn confusion(pred: &CategoricalMask, gt: &CategoricalMask, map: &LabelMap) -> Result<ConfusionCounts> {
    check_dims(pred, gt)?;
    let width = pred.width();
    let mut counts = vec![ClassCounts::default(); map.len()];
    for (i, (&p, &g)) in pred.data().iter().zip(gt.data()).enumerate() {
        let p = class_index(map, p, i, width)?;
        let g = class_index(map, g, i, width)?;
        if p == g {
            counts[p].tp += 1;
        } else {
            counts[p].fp += 1;
            counts[g].fn_ += 1;
        }
    }
    let total = pred.data().len() as u64;
    for c in &mut counts {
        c.tn = total - c.tp - c.fp - c.fn_;
    }
    Ok(ConfusionCounts {
        classes: map.labels().zip(counts).collect(),
    })
}

fn ratio(num: u64, den: u64, metric: &'static str, class: LabelId) -> Result<f64> {
    if den == 0 {
        return Err(Error::UndefinedScore { metric, class: class.0 });
    }
    Ok(num as f64 / den as f64)
}

pub fn accuracy(c: &ConfusionCounts, class: LabelId) -> Result<f64> {
    let k = c.require(class)?;
    ratio(k.tp, k.tp + k.fn_, "accuracy", class)
}

pub fn iou(c: &ConfusionCounts, class: LabelId) -> Result<f64> {
    let k = c.require(class)?;
    ratio(k.tp, k.tp + k.fp + k.fn_, "iou", class)
}

pub fn dice(c: &ConfusionCounts, class: LabelId) -> Result<f64> {
    let k = c.require(class)?;
    ratio(2 * k.tp, 2 * k.tp + k.fp + k.fn_, "dice", class)
}

/// Pixels with value `class` that have a 4-neighbor of another value, in
/// row-major order as `(x, y)`. The raster edge does not count as a
/// transition.
pub fn boundary(mask: &CategoricalMask, class: u8) -> Vec<(usize, usize)> {
    let (w, h) = mask.dimensions();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) != class {
                continue;
            }
            let differs = (x > 0 && mask.get(x - 1, y) != class)
                || (x + 1 < w && mask.get(x + 1, y) != class)
                || (y > 0 && mask.get(x, y - 1) != class)
                || (y + 1 < h && mask.get(x, y + 1) != class);
            if differs {
                out.push((x, y));
            }
        }
    }
    out
}

/// Default boundary tolerance: `round(0.0075 * diagonal)` pixels.
pub fn default_theta(width: usize, height: usize) -> f64 {
    (0.0075 * ((width * width + height * height) as f64).sqrt()).round()
}

/// Fraction of `points` with a marked pixel in `grid` within `theta`.
fn matched_fraction(points: &[(usize, usize)], grid: &[bool], w: usize, h: usize, theta: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let r = theta.floor().max(0.0) as isize;
    let t2 = theta * theta;
    let hit = |&(x, y): &(usize, usize)| {
        for dy in -r..=r {
            let yy = y as isize + dy;
            if yy < 0 || yy >= h as isize {
                continue;
            }
            for dx in -r..=r {
                let xx = x as isize + dx;
                if xx < 0 || xx >= w as isize {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64) <= t2 && grid[yy as usize * w + xx as usize] {
                    return true;
                }
            }
        }
        false
    };
    points.iter().filter(|p| hit(p)).count() as f64 / points.len() as f64
}

/// Boundary F1 for the class with pixel value `class`.
///
/// Both boundaries empty scores 1; otherwise an empty side contributes zero
/// precision or recall.
pub fn bf1(pred: &CategoricalMask, gt: &CategoricalMask, class: u8, theta: f64) -> Result<f64> {
    check_dims(pred, gt)?;
    let (w, h) = pred.dimensions();
    let pb = boundary(pred, class);
    let gb = boundary(gt, class);
    if pb.is_empty() && gb.is_empty() {
        return Ok(1.0);
    }
    let mark = |pts: &[(usize, usize)]| {
        let mut g = vec![false; w * h];
        for &(x, y) in pts {
            g[y * w + x] = true;
        }
        g
    };
    let precision = matched_fraction(&pb, &mark(&gb), w, h, theta);
    let recall = matched_fraction(&gb, &mark(&pb), w, h, theta);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (recall + precision))
}

/// Mean of per-class boundary F1 over every class in `map`.
pub fn mean_bf_score(pred: &CategoricalMask, gt: &CategoricalMask, map: &LabelMap, theta: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &(_, value) in map.entries() {
        sum += bf1(pred, gt, value, theta)?;
    }
    Ok(sum / map.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: LabelId,
    pub accuracy: f64,
    pub iou: f64,
    pub dice: f64,
    pub bf1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Positive-class scores; NaN when undefined.
    pub accuracy: f64,
    pub iou: f64,
    pub dice: f64,
    pub mean_bf_score: f64,
    pub per_class: Vec<ClassScores>,
    pub classes: usize,
    /// Per-class accuracy/IoU/Dice values that were undefined.
    pub undefined: usize,
}

impl MetricReport {
    pub fn compute(pred: &CategoricalMask, gt: &CategoricalMask, map: &LabelMap, theta: f64) -> Result<Self> {
        let counts = confusion(pred, gt, map)?;
        let mut undefined = 0;
        let mut or_nan = |r: Result<f64>| match r {
            Ok(v) => Ok(v),
            Err(Error::UndefinedScore { .. }) => {
                undefined += 1;
                Ok(f64::NAN)
            }
            Err(e) => Err(e),
        };
        let mut per_class = Vec::with_capacity(map.len());
        for &(label, value) in map.entries() {
            per_class.push(ClassScores {
                label,
                accuracy: or_nan(accuracy(&counts, label))?,
                iou: or_nan(iou(&counts, label))?,
                dice: or_nan(dice(&counts, label))?,
                bf1: bf1(pred, gt, value, theta)?,
            });
        }
        let positive = *per_class.last().expect("map is non-empty");
        let mean_bf_score = per_class.iter().map(|c| c.bf1).sum::<f64>() / per_class.len() as f64;
        Ok(Self {
            accuracy: positive.accuracy,
            iou: positive.iou,
            dice: positive.dice,
            mean_bf_score,
            classes: per_class.len(),
            per_class,
            undefined,
        })
    }

    pub fn row(&self, image_id: &str, config_name: &str) -> MetricRow {
        MetricRow {
            image_id: image_id.to_owned(),
            config_name: config_name.to_owned(),
            accuracy: self.accuracy,
            iou: self.iou,
            dice: self.dice,
            mean_bf_score: self.mean_bf_score,
        }
    }
}

/// One CSV row of the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricRow {
    pub image_id: String,
    pub config_name: String,
    pub accuracy: f64,
    pub iou: f64,
    pub dice: f64,
    pub mean_bf_score: f64,
}

impl MetricRow {
    pub const METRICS: [&'static str; 4] = ["accuracy", "iou", "dice", "mean-bf-score"];

    pub fn scores(&self) -> [(&'static str, f64); 4] {
        [
            ("accuracy", self.accuracy),
            ("iou", self.iou),
            ("dice", self.dice),
            ("mean-bf-score", self.mean_bf_score),
        ]
    }

    /// Per-metric mean over `rows`, skipping NaN entries.
    pub fn mean(rows: &[MetricRow], image_id: &str, config_name: &str) -> MetricRow {
        let avg = |f: fn(&MetricRow) -> f64| {
            let vals: Vec<f64> = rows.iter().map(f).filter(|v| !v.is_nan()).collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        MetricRow {
            image_id: image_id.to_owned(),
            config_name: config_name.to_owned(),
            accuracy: avg(|r| r.accuracy),
            iou: avg(|r| r.iou),
            dice: avg(|r| r.dice),
            mean_bf_score: avg(|r| r.mean_bf_score),
        }
    }
}
