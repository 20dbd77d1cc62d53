//! Criterion benchmarks for the warp, filter, augmentation and metric paths.
//! See `benches/pipeline.rs`; this library target is intentionally empty.
