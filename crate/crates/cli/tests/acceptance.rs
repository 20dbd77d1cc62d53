//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use epiaug_core::augment::{augment_pair, augment_pair_traced, sample_params};
use epiaug_core::datasetio::{save_image, save_mask};
use epiaug_core::metrics::{self, bf1, confusion};
use epiaug_core::stats::{decide, rank_scores, DEFAULT_ALPHAS};
use epiaug_core::testkit::{fixtures, oracle, published};
use epiaug_core::warp::{compose, raster_center};
use epiaug_core::{
    global_filter, ttest2, warp_image, warp_mask, AffineTransform, AugmentConfig, BoundaryPolicy, CategoricalMask,
    ImageBuffer, InterpConfig, InterpMethod, LabelId, LabelMap, MetricReport, Raster, SampledAugmentation,
    TransformParams, TransformedMask,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("binary closure", binary_closure),
        ("global filter suite", global_filter_suite),
        ("warp oracle equivalence", warp_oracle_equivalence),
        ("grid-aligned invariance", grid_aligned_invariance),
        ("metric suite", metric_suite),
        ("stats suite", stats_suite),
        ("determinism", determinism),
        ("throughput", throughput),
        ("rotated disk smoke check", rotated_disk),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {reason}");
            }
        }
    }
    let _ = panic::take_hook();
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}

fn binary_closure() -> Outcome {
    let start = Instant::now();
    let (w, h) = (64, 64);
    let mut warped = 0;
    for (ci, interp) in InterpConfig::STANDARD.into_iter().enumerate() {
        let config = AugmentConfig {
            interp,
            seed: 1000 + ci as u64,
            ..AugmentConfig::default()
        };
        for k in 0..1000 {
            let sample = sample_params(&config, k, 0).map_err(|e| e.to_string())?;
            for (family, mask) in fixtures::closure_masks(w, h, k as u64) {
                let img = fixtures::image_from_mask(&mask);
                let (_, out) = augment_pair(&img, &mask, &sample, &config).map_err(|e| e.to_string())?;
                let bad = out.data().iter().filter(|&&v| v != 0 && v != 255).count();
                ensure!(bad == 0, "{} transform {k} on {family}: {bad} non-binary pixels", interp.name());
                warped += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{warped} augmented masks, 0 violations, {:.1}s", elapsed.as_secs_f64()))
}

fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> TransformedMask {
    let data = (0..w * h).map(|_| rng.random()).collect();
    TransformedMask::new(w, h, data).unwrap()
}

fn global_filter_suite() -> Outcome {
    let example = TransformedMask::new(2, 2, vec![0, 255, 128, 200]).unwrap();
    let (out, stats) = global_filter(&example).map_err(|e| e.to_string())?;
    ensure!(out.data() == [0, 255, 0, 255], "example gave {:?}", out.data());
    ensure!(stats.mu == 145.75, "mu {}", stats.mu);

    // 255 == mu would fall to 0 without the precedence of {0, 255}.
    let all_white = TransformedMask::new(3, 3, vec![255; 9]).unwrap();
    let (out, _) = global_filter(&all_white).map_err(|e| e.to_string())?;
    ensure!(out.data().iter().all(|&v| v == 255), "all-255 changed");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..500 {
        let (w, h) = (rng.random_range(1..24), rng.random_range(1..24));
        let binary: Vec<u8> = (0..w * h).map(|_| if rng.random() { 255 } else { 0 }).collect();
        let plane = TransformedMask::new(w, h, binary.clone()).unwrap();
        let (fixed, stats) = global_filter(&plane).map_err(|e| e.to_string())?;
        ensure!(fixed.data() == binary && stats.changed == 0, "case {case}: binary input changed");

        let gray = random_plane(&mut rng, w, h);
        let (once, _) = global_filter(&gray).map_err(|e| e.to_string())?;
        let (twice, _) = global_filter(&once.to_transformed()).map_err(|e| e.to_string())?;
        ensure!(once == twice, "case {case}: not idempotent");
    }
    Ok("example, all-255 precedence, 500 fixed-point and 500 idempotence cases".into())
}

fn random_image(rng: &mut ChaCha8Rng, max: usize) -> ImageBuffer {
    let (w, h) = (rng.random_range(1..=max), rng.random_range(1..=max));
    let ch = if rng.random_bool(0.3) { 3 } else { 1 };
    fixtures::random_image(w, h, ch, rng.random())
}

fn random_transform(rng: &mut ChaCha8Rng, w: usize, h: usize) -> AffineTransform {
    let params = TransformParams {
        rotation: rng.random_range(-180.0..180.0),
        shear_h: rng.random_range(-40.0..40.0),
        shear_v: rng.random_range(-40.0..40.0),
        tx: rng.random_range(-(w as f64)..w as f64) / 2.0,
        ty: rng.random_range(-(h as f64)..h as f64) / 2.0,
        scale: rng.random_range(0.5..2.0),
    };
    compose(&params, raster_center(w, h)).unwrap()
}

fn warp_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    for method in InterpMethod::ALL {
        for case in 0..200 {
            let img = random_image(&mut rng, 64);
            let t = random_transform(&mut rng, img.width(), img.height());
            let fill = rng.random();
            let got = warp_image(&img, &t, method, BoundaryPolicy::fill(fill)).map_err(|e| e.to_string())?;
            let want = oracle::warp(&img, &t, method, fill);
            let diffs = got.data().iter().zip(&want).filter(|(a, b)| a != b).count();
            ensure!(
                diffs == 0,
                "{method} case {case} ({}x{}x{}): {diffs} pixels differ",
                img.width(),
                img.height(),
                img.channels()
            );
            compared += 1;
        }
    }
    Ok(format!("{compared} cases bit-exact (200 per method)"))
}

/// Exact pixel permutation for a rotation by `quarter` * 90 degrees about
/// the center followed by an integer shift.
fn permuted(img: &ImageBuffer, quarter: u32, tx: i64, ty: i64, fill: u8) -> Vec<u8> {
    let (w, h, ch) = (img.width() as i64, img.height() as i64, img.channels());
    // Doubled center coordinates keep everything integral.
    let (cx2, cy2) = (w - 1, h - 1);
    let mut out = Vec::with_capacity(img.data().len());
    for y in 0..h {
        for x in 0..w {
            let (dx2, dy2) = (2 * (x - tx) - cx2, 2 * (y - ty) - cy2);
            // Inverse rotation of the offset.
            let (ux2, uy2) = match quarter % 4 {
                0 => (dx2, dy2),
                1 => (dy2, -dx2),
                2 => (-dx2, -dy2),
                _ => (-dy2, dx2),
            };
            let (u, v) = ((ux2 + cx2) / 2, (uy2 + cy2) / 2);
            for c in 0..ch {
                out.push(if (0..w).contains(&u) && (0..h).contains(&v) {
                    img.get(u as usize, v as usize, c)
                } else {
                    fill
                });
            }
        }
    }
    out
}

fn grid_aligned_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..50 {
        let w = rng.random_range(2..48);
        let quarter = rng.random_range(0..4u32);
        // Quarter turns about the center stay on the grid when w + h is even.
        let h = if quarter % 2 == 1 { w + 2 * rng.random_range(0..4) } else { rng.random_range(2..48) };
        let ch = if rng.random_bool(0.3) { 3 } else { 1 };
        let img = fixtures::random_image(w, h, ch, rng.random());
        let (tx, ty) = (rng.random_range(-6..=6i64), rng.random_range(-6..=6i64));
        let params = TransformParams {
            rotation: 90.0 * quarter as f64,
            tx: tx as f64,
            ty: ty as f64,
            ..TransformParams::NEUTRAL
        };
        let t = compose(&params, raster_center(w, h)).map_err(|e| e.to_string())?;
        let fill = rng.random();
        let want = permuted(&img, quarter, tx, ty, fill);
        for method in InterpMethod::ALL {
            let got = warp_image(&img, &t, method, BoundaryPolicy::fill(fill)).map_err(|e| e.to_string())?;
            ensure!(
                got.data() == want,
                "case {case}: {method} differs ({w}x{h}, {}deg, shift ({tx}, {ty}))",
                90 * quarter
            );
        }
    }
    Ok("50 cases, all three methods equal the exact permutation".into())
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> CategoricalMask {
    let density = rng.random_range(0.05..0.95);
    let mut data: Vec<u8> = (0..w * h).map(|_| if rng.random_bool(density) { 255 } else { 0 }).collect();
    data[rng.random_range(0..w * h)] = 255;
    CategoricalMask::binary(w, h, data).unwrap()
}

fn metric_suite() -> Outcome {
    let map = LabelMap::binary();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let (w, h) = (rng.random_range(2..40), rng.random_range(2..40));
        let (pred, gt) = (random_mask(&mut rng, w, h), random_mask(&mut rng, w, h));
        let c = confusion(&pred, &gt, &map).map_err(|e| e.to_string())?;
        let i = metrics::iou(&c, LabelId::FOREGROUND).map_err(|e| e.to_string())?;
        let d = metrics::dice(&c, LabelId::FOREGROUND).map_err(|e| e.to_string())?;
        let err = (d - 2.0 * i / (1.0 + i)).abs();
        worst = worst.max(err);
        ensure!(err <= 1e-12, "case {case}: |D - 2I/(1+I)| = {err:e}");
    }

    let (pred, gt) = fixtures::hand_counted_pair();
    let report = MetricReport::compute(&pred, &gt, &map, 1.0).map_err(|e| e.to_string())?;
    ensure!(
        report.accuracy == 0.5 && report.iou == 1.0 / 3.0 && report.dice == 0.5,
        "4x4 fixture gave accuracy {}, IoU {}, Dice {}",
        report.accuracy,
        report.iou,
        report.dice
    );

    let gt = fixtures::column_split(16, 16, 8);
    for (offset, expected) in [(1, 1.0), (2, 0.0)] {
        let pred = fixtures::column_split(16, 16, 8 + offset);
        let got = bf1(&pred, &gt, 255, 1.0).map_err(|e| e.to_string())?;
        let want = oracle::bf1(&pred, &gt, 255, 1.0);
        ensure!(got == expected && want == expected, "offset {offset}: bf1 {got}, oracle {want}");
    }
    for case in 0..200 {
        let (w, h) = (rng.random_range(2..32), rng.random_range(2..32));
        let (pred, gt) = (fixtures::blob_mask(w, h, rng.random()), fixtures::blob_mask(w, h, rng.random()));
        let theta = rng.random_range(0..5) as f64;
        for class in [0, 255] {
            let got = bf1(&pred, &gt, class, theta).map_err(|e| e.to_string())?;
            let want = oracle::bf1(&pred, &gt, class, theta);
            ensure!((got - want).abs() <= 1e-12, "case {case} class {class}: bf1 {got} vs oracle {want}");
        }
    }
    Ok(format!(
        "Dice-IoU worst error {worst:e} over 1000 pairs; 4x4 fixture exact; BF1 offsets and 400 oracle checks agree"
    ))
}

fn reference_p(a: &[f64], b: &[f64]) -> f64 {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    let df = (a.len() + b.len() - 2) as f64;
    let sp2 = (ss(a, ma) + ss(b, mb)) / df;
    let t = (ma - mb) / (sp2 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * dist.sf(t.abs())
}

fn stats_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..10_000 {
        let n = rng.random_range(1..=30);
        let levels = rng.random_range(1..=n.max(2));
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / 10.0).collect();
        let ranks = rank_scores(&scores).map_err(|e| e.to_string())?;
        let total: f64 = ranks.iter().sum();
        ensure!(total == (n * (n + 1)) as f64 / 2.0, "trial {trial}: rank sum {total} for n = {n}");
        ensure!(ranks == oracle::mid_ranks(&scores), "trial {trial}: ranks differ from oracle");
    }

    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let (na, nb) = (rng.random_range(2..30), rng.random_range(2..30));
        let shift = rng.random_range(-1.0..1.0);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(0.0..2.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(0.0..2.0) + shift).collect();
        let got = ttest2(&a, &b, &DEFAULT_ALPHAS).map_err(|e| e.to_string())?.p;
        let want = reference_p(&a, &b);
        let diff = (got - want).abs();
        worst = worst.max(diff);
        ensure!(diff <= 1e-6, "case {case}: p {got} vs reference {want}");
    }

    let mut decisions = 0;
    for row in published::ROWS {
        for (alpha, &h) in DEFAULT_ALPHAS.iter().zip(&row.h) {
            ensure!(
                decide(row.p, *alpha) as u8 == h,
                "{} {} {} p = {} at alpha {alpha}: expected h = {h}",
                row.metric,
                row.pair,
                row.model,
                row.p
            );
            decisions += 1;
        }
    }
    ensure!(decisions == 144, "{decisions} decisions");
    Ok(format!(
        "10000 rank-sum trials; ttest2 worst |dp| {worst:e} over 100 pairs; {decisions} table decisions reproduced"
    ))
}

fn epiaug(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_epiaug"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("epiaug {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn write_fixture(root: &Path, n: usize, size: usize) -> (PathBuf, PathBuf) {
    let (images, masks) = (root.join("images"), root.join("masks"));
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&masks).unwrap();
    for i in 0..n {
        let (img, mask) = fixtures::synthetic_pair(size, size, i as u64);
        save_image(&images.join(format!("img{i:03}.png")), &img).unwrap();
        save_mask(&masks.join(format!("img{i:03}.png")), &mask).unwrap();
    }
    (images, masks)
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn determinism() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let (images, masks) = write_fixture(dir.path(), 10, 64);
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"interp": "BIC_BIC", "augmentations-per-pair": 4, "seed": 17}"#).unwrap();
    let run = |workers: &str, out: &Path| {
        epiaug(&[
            "--workers", workers, "augment", "--config", path(&config), "--images", path(&images), "--masks",
            path(&masks), "--out", path(out),
        ])
    };
    let (one, eight, again) = (dir.path().join("w1"), dir.path().join("w8"), dir.path().join("w1-again"));
    run("1", &one)?;
    run("8", &eight)?;
    run("1", &again)?;
    let (a, b, c) = (tree(&one), tree(&eight), tree(&again));
    ensure!(a.len() == 40 + 40 + 2, "{} files written", a.len());
    ensure!(a == b, "--workers 1 and --workers 8 trees differ");
    ensure!(a == c, "rerun differs");
    Ok(format!("{} files byte-identical across worker counts and reruns", a.len()))
}

fn throughput() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let (images, masks) = write_fixture(dir.path(), 55, 256);
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"interp": "BIC_BIC", "augmentations-per-pair": 10}"#).unwrap();
    let out = dir.path().join("out");
    let start = Instant::now();
    epiaug(&[
        "augment", "--config", path(&config), "--images", path(&images), "--masks", path(&masks), "--out", path(&out),
    ])?;
    let elapsed = start.elapsed();
    let count = |sub: &str| fs::read_dir(out.join(sub)).map(|d| d.count()).unwrap_or(0);
    ensure!(count("images") == 550 && count("masks") == 550, "wrote {} + {}", count("images"), count("masks"));
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "550 pairs at 256x256 BIC_BIC in {:.2}s on {} thread(s), PNG IO included",
        elapsed.as_secs_f64(),
        std::thread::available_parallelism().map_or(1, |n| n.get())
    ))
}

fn rotated_disk() -> Outcome {
    let disk = fixtures::disk_mask(256, 256, 80.0);
    let img = fixtures::image_from_mask(&disk);
    let sample = SampledAugmentation {
        params: TransformParams {
            rotation: 30.0,
            ..TransformParams::NEUTRAL
        },
        brightness: 1.0,
    };
    let bicubic = AugmentConfig {
        interp: InterpConfig::BIC_BIC,
        ..AugmentConfig::neutral()
    };
    let traced = augment_pair_traced(&img, &disk, &sample, &bicubic).map_err(|e| e.to_string())?;
    let intermediate = traced.pre_filter.intermediate_count();
    ensure!(intermediate > 0, "bicubic pre-filter mask is already binary");
    ensure!(traced.mask.data().iter().all(|&v| v == 0 || v == 255), "post-filter mask not binary");
    // A disk is rotation invariant, so a smooth result stays close to it.
    let map = LabelMap::binary();
    let report = MetricReport::compute(&traced.mask, &disk, &map, 1.0).map_err(|e| e.to_string())?;
    ensure!(report.iou > 0.98 && report.mean_bf_score > 0.95, "IoU {} BF {}", report.iou, report.mean_bf_score);

    let t = compose(&sample.params, raster_center(256, 256)).map_err(|e| e.to_string())?;
    let nearest = warp_mask(&disk, &t, InterpMethod::Nearest, BoundaryPolicy::fill(0)).map_err(|e| e.to_string())?;
    ensure!(nearest.is_binary(), "nearest pre-filter mask has intermediate values");
    Ok(format!(
        "bicubic: {intermediate} intermediate pixels before filtering, binary after (IoU {:.4} vs disk); nearest binary",
        report.iou
    ))
}
