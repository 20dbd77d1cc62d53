use std::fmt;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use epiaug_core::augment::{augment_dataset, AugmentConfig};
use epiaug_core::datasetio::{self, load_mask, load_mask_raw, load_pair, png_stems, resize_pair, PairManifest};
use epiaug_core::metrics::{default_theta, MetricRow};
use epiaug_core::stats::{self, Grouping, RankTable, ScoreTable};
use epiaug_core::{LabelMap, MetricReport, Raster as _};

use crate::compare::composite;

/// Bad flags, unreadable or invalid configuration. Exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Everything needed to re-run a command, written as `<out>.run.json`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Augment(AugmentArgs),
    Evaluate(EvaluateArgs),
    Rank(RankArgs),
    Ttest(TtestArgs),
    Split(SplitArgs),
    Compare(CompareArgs),
}

pub fn run_config_path(out: &Path) -> PathBuf {
    let normalized: PathBuf = out.components().collect();
    let mut s = normalized.into_os_string();
    s.push(".run.json");
    PathBuf::from(s)
}

fn persist(out: &Path, run: &RunConfig) -> Result<()> {
    let path = run_config_path(out);
    let text = serde_json::to_string_pretty(run)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn replay(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let run: RunConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    match run {
        RunConfig::Augment(a) => augment(&a),
        RunConfig::Evaluate(a) => evaluate(&a),
        RunConfig::Rank(a) => rank(&a),
        RunConfig::Ttest(a) => ttest(&a),
        RunConfig::Split(a) => split(&a),
        RunConfig::Compare(a) => compare(&a),
    }
}

fn create_csv(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(file))
}

fn create_file(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AugmentArgs {
    /// Augmentation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resize every pair to NxN before augmenting.
    #[arg(long)]
    pub resize: Option<usize>,
    /// Effective config recorded for replay; takes precedence over `config`.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective: Option<AugmentConfig>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AugmentManifestRow<'a> {
    pair_id: &'a str,
    aug_index: usize,
    config_name: &'a str,
    image_path: String,
    mask_path: String,
    rotation: f64,
    shear_h: f64,
    shear_v: f64,
    tx: f64,
    ty: f64,
    scale: f64,
    brightness: f64,
}

fn load_augment_config(args: &AugmentArgs) -> Result<AugmentConfig> {
    let mut config = match &args.effective {
        Some(c) => c.clone(),
        None => {
            let text = fs::read_to_string(&args.config)
                .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
            AugmentConfig::from_json(&text)
                .map_err(|e| usage(format!("{}: {e}", args.config.display())))?
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

pub fn augment(args: &AugmentArgs) -> Result<()> {
    let config = load_augment_config(args)?;
    if args.resize == Some(0) {
        return Err(usage("--resize must be positive"));
    }
    let manifest = PairManifest::discover(&args.images, &args.masks)?;
    if manifest.is_empty() {
        bail!("no image/mask pairs found in {}", args.images.display());
    }
    let map = LabelMap::binary();
    let loaded: Vec<Result<_>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let pair = load_pair(&e.image_path, &e.mask_path, &map)
                .with_context(|| format!("pair {}", e.pair_id))?;
            match args.resize {
                Some(n) => resize_pair(&pair.image, &pair.mask, (n, n), config.interp)
                    .with_context(|| format!("pair {}", e.pair_id)),
                None => Ok((pair.image, pair.mask)),
            }
        })
        .collect();
    let pairs = loaded.into_iter().collect::<Result<Vec<_>>>()?;

    let augmented = augment_dataset(&pairs, &config).map_err(|e| match e {
        epiaug_core::Error::Pair { index, source } => {
            anyhow::anyhow!("pair {}: {source}", manifest.entries[index].pair_id)
        }
        other => other.into(),
    })?;

    let images_dir = args.out.join("images");
    let masks_dir = args.out.join("masks");
    for d in [&images_dir, &masks_dir] {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let name = config.interp.name();
    let file_name = |i: usize, k: usize| format!("{}_{k}_{name}.png", manifest.entries[i].pair_id);
    augmented
        .par_iter()
        .map(|a| {
            let file = file_name(a.pair_index, a.aug_index);
            datasetio::save_image(&images_dir.join(&file), &a.image)?;
            datasetio::save_mask(&masks_dir.join(&file), &a.mask)?;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;

    let mut w = create_csv(&args.out.join("manifest.csv"))?;
    for a in &augmented {
        let file = file_name(a.pair_index, a.aug_index);
        let p = a.sample.params;
        w.serialize(AugmentManifestRow {
            pair_id: &manifest.entries[a.pair_index].pair_id,
            aug_index: a.aug_index,
            config_name: &name,
            image_path: format!("images/{file}"),
            mask_path: format!("masks/{file}"),
            rotation: p.rotation,
            shear_h: p.shear_h,
            shear_v: p.shear_v,
            tx: p.tx,
            ty: p.ty,
            scale: p.scale,
            brightness: a.sample.brightness,
        })?;
    }
    w.flush()?;
    fs::write(args.out.join("config.json"), config.to_json()? + "\n")?;
    persist(
        &args.out,
        &RunConfig::Augment(AugmentArgs {
            effective: Some(config),
            ..args.clone()
        }),
    )?;
    println!("wrote {} augmented pairs to {}", augmented.len(), args.out.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Directory of predicted masks.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth masks with matching file stems.
    #[arg(long)]
    pub gt: PathBuf,
    /// Boundary tolerance in pixels; defaults to 0.75% of each image diagonal.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Config name written in each row; defaults to the prediction directory name.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    if let Some(t) = args.theta {
        if !(t.is_finite() && t >= 0.0) {
            return Err(usage("--theta must be a non-negative number"));
        }
    }
    let pred = png_stems(&args.pred)?;
    let gt = png_stems(&args.gt)?;
    if pred.is_empty() {
        bail!("no PNG masks in {}", args.pred.display());
    }
    let mut unmatched: Vec<&str> = pred
        .iter()
        .filter(|(s, _)| !gt.iter().any(|(g, _)| g == s))
        .map(|(s, _)| s.as_str())
        .collect();
    unmatched.extend(
        gt.iter()
            .filter(|(s, _)| !pred.iter().any(|(p, _)| p == s))
            .map(|(s, _)| s.as_str()),
    );
    if !unmatched.is_empty() {
        bail!("unmatched stems: {}", unmatched.join(", "));
    }
    let name = args.name.clone().unwrap_or_else(|| {
        args.pred
            .components()
            .next_back()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .unwrap_or_else(|| "pred".into())
    });
    let map = LabelMap::binary();
    let rows: Vec<Result<MetricRow>> = pred
        .par_iter()
        .zip(gt.par_iter())
        .map(|((stem, p), (_, g))| {
            let (pm, _) = load_mask(p, &map)?;
            let (gm, _) = load_mask(g, &map)?;
            let theta = args.theta.unwrap_or_else(|| default_theta(gm.width(), gm.height()));
            let report = MetricReport::compute(&pm, &gm, &map, theta).with_context(|| format!("pair {stem}"))?;
            Ok(report.row(stem, &name))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut w = create_csv(&args.out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.serialize(MetricRow::mean(&rows, "mean", &name))?;
    w.flush()?;
    persist(&args.out, &RunConfig::Evaluate(args.clone()))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RankArgs {
    /// Score CSV: image-id, config-name, metric, score (or the evaluate layout).
    #[arg(long)]
    pub scores: PathBuf,
    /// `item`: rank within each (image, metric); `metric`: rank per-metric means.
    #[arg(long, default_value = "item")]
    pub group_by: String,
    /// Rank CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Rank-sum CSV; defaults to `<out stem>_sums.csv`.
    #[arg(long)]
    pub sums: Option<PathBuf>,
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let grouping: Grouping = args.group_by.parse().map_err(|e: epiaug_core::Error| usage(e.to_string()))?;
    let file = File::open(&args.scores).with_context(|| format!("opening {}", args.scores.display()))?;
    let table = ScoreTable::read_csv(file).with_context(|| args.scores.display().to_string())?;
    let ranks = table.rank(grouping)?;
    ranks.write_csv(create_file(&args.out)?)?;
    let sums = stats::sum_ranks(&ranks);
    let sums_path = args.sums.clone().unwrap_or_else(|| {
        let stem = args.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        args.out.with_file_name(format!("{stem}_sums.csv"))
    });
    stats::write_rank_sums(&sums, create_file(&sums_path)?)?;
    for (method, sum) in &sums {
        println!("{method}\t{sum}");
    }
    persist(&args.out, &RunConfig::Rank(args.clone()))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TtestArgs {
    /// Rank CSV from `rank`.
    #[arg(long)]
    pub ranks: PathBuf,
    /// Methods to compare, `A/B`.
    #[arg(long)]
    pub pair: String,
    /// Significance levels, comma separated.
    #[arg(long, default_value = "0.05,0.2,0.35")]
    pub alphas: String,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: {v:?} is not a number")))
        })
        .collect()
}

pub fn ttest(args: &TtestArgs) -> Result<()> {
    let (a, b) = args
        .pair
        .split_once('/')
        .ok_or_else(|| usage(format!("--pair {:?} must look like A/B", args.pair)))?;
    let alphas = parse_list(&args.alphas, "--alphas")?;
    if alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(usage("--alphas must lie in (0, 1)"));
    }
    let file = File::open(&args.ranks).with_context(|| format!("opening {}", args.ranks.display()))?;
    let ranks = RankTable::read_csv(file).with_context(|| args.ranks.display().to_string())?;
    let rows = stats::ttest_by_metric(&ranks, a, b, &alphas)?;
    stats::write_ttest_csv(&rows, &alphas, create_file(&args.out)?)?;
    persist(&args.out, &RunConfig::Ttest(args.clone()))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, default_value = "0.7,0.15,0.15")]
    pub fractions: String,
    /// Manifest CSV output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn split(args: &SplitArgs) -> Result<()> {
    let f = parse_list(&args.fractions, "--fractions")?;
    let [t, v, s] = f[..] else {
        return Err(usage("--fractions needs three values"));
    };
    let manifest = PairManifest::discover(&args.images, &args.masks)?;
    let assigned = datasetio::split(&manifest, (t, v, s), args.seed).map_err(|e| match e {
        epiaug_core::Error::Config(m) => usage(m),
        other => other.into(),
    })?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    assigned.write_csv(&args.out)?;
    use datasetio::Split;
    println!(
        "train {} / val {} / test {}",
        assigned.count(Split::Train),
        assigned.count(Split::Val),
        assigned.count(Split::Test)
    );
    persist(&args.out, &RunConfig::Split(args.clone()))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub mask_a: PathBuf,
    #[arg(long)]
    pub mask_b: PathBuf,
    /// Output PNG.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let image = datasetio::load_image(&args.image)?;
    let gt = load_mask_raw(&args.gt)?;
    let a = load_mask_raw(&args.mask_a)?;
    let b = load_mask_raw(&args.mask_b)?;
    let out = composite(&image, [&gt, &a, &b])?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    datasetio::save_image(&args.out, &out)?;
    persist(&args.out, &RunConfig::Compare(args.clone()))?;
    Ok(())
}
