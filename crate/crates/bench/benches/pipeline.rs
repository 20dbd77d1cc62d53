use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use epiaug_core::testkit::fixtures;
use epiaug_core::warp::{compose, raster_center};
use epiaug_core::{
    augment_pair, global_filter, sample_params, warp_image, AugmentConfig, BoundaryPolicy, InterpConfig,
    InterpMethod, LabelMap, MetricReport, TransformParams, TransformedMask,
};

const SIZE: usize = 256;

fn bench_warp(c: &mut Criterion) {
    let (img, _) = fixtures::synthetic_pair(SIZE, SIZE, 1);
    let params = TransformParams {
        rotation: 17.0,
        shear_h: 5.0,
        scale: 1.1,
        ..TransformParams::NEUTRAL
    };
    let t = compose(&params, raster_center(SIZE, SIZE)).unwrap();
    let mut group = c.benchmark_group("warp_256");
    for method in InterpMethod::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(method), &method, |b, &m| {
            b.iter(|| warp_image(black_box(&img), &t, m, BoundaryPolicy::fill(0)).unwrap())
        });
    }
    group.finish();
}

fn bench_filter(c: &mut Criterion) {
    let data = (0..SIZE * SIZE).map(|i| (i * 31 % 256) as u8).collect();
    let plane = TransformedMask::new(SIZE, SIZE, data).unwrap();
    c.bench_function("global_filter_256", |b| b.iter(|| global_filter(black_box(&plane)).unwrap()));
}

fn bench_augment(c: &mut Criterion) {
    let (img, mask) = fixtures::synthetic_pair(SIZE, SIZE, 2);
    let mut group = c.benchmark_group("augment_pair_256");
    for interp in InterpConfig::STANDARD {
        let config = AugmentConfig {
            interp,
            ..AugmentConfig::default()
        };
        let sample = sample_params(&config, 0, 0).unwrap();
        group.bench_function(interp.name(), |b| {
            b.iter(|| augment_pair(black_box(&img), &mask, &sample, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_metrics(c: &mut Criterion) {
    let pred = fixtures::blob_mask(SIZE, SIZE, 3);
    let gt = fixtures::blob_mask(SIZE, SIZE, 4);
    let map = LabelMap::binary();
    c.bench_function("metric_report_256", |b| {
        b.iter(|| MetricReport::compute(black_box(&pred), &gt, &map, 3.0).unwrap())
    });
}

criterion_group!(benches, bench_warp, bench_filter, bench_augment, bench_metrics);
criterion_main!(benches);
