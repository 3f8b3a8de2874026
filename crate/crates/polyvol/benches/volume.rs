//! Walk-variant and repetition-scaling benchmarks.
//!
//! `estimate` pits the coordinate-direction walk against the random-direction
//! walk on the same body; the coordinate walk should win on wall time thanks
//! to the amortized slack updates. `repeat` measures how repetition batches
//! scale with worker threads when the `parallel` feature is on (the default);
//! build with `--no-default-features` to time the sequential fallback.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use polyvol::generators;
use polyvol::volume::{estimate_volume, estimate_with_statistics, VolumeParams};
use polyvol::walks::WalkVariant;
use polyvol::RngStream;

fn walk_variants(c: &mut Criterion) {
    let cube = generators::cube(8).expect("cube generator");
    let mut group = c.benchmark_group("estimate/cube-8");
    group.sample_size(10);
    for variant in [WalkVariant::Cdhr, WalkVariant::Rdhr] {
        let name = match variant {
            WalkVariant::Cdhr => "cdhr",
            WalkVariant::Rdhr => "rdhr",
        };
        let params = VolumeParams {
            variant,
            ..VolumeParams::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut rng = RngStream::new(7);
                estimate_volume(black_box(&cube), &params, &mut rng).expect("estimate")
            })
        });
    }
    group.finish();
}

fn repetition_batches(c: &mut Criterion) {
    let cube = generators::cube(6).expect("cube generator");
    let params = VolumeParams::default();
    let master = RngStream::new(42);
    let reps = 8;
    let mut group = c.benchmark_group("repeat/cube-6-x8");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    for threads in [1usize, 2, 4] {
        group.bench_with_input(BenchmarkId::new("threads", threads), &threads, |b, &j| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .expect("thread pool");
            b.iter(|| {
                pool.install(|| {
                    estimate_with_statistics(black_box(&cube), &params, reps, None, &master)
                        .expect("statistics")
                })
            })
        });
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function(BenchmarkId::new("sequential", reps), |b| {
        b.iter(|| {
            estimate_with_statistics(black_box(&cube), &params, reps, None, &master)
                .expect("statistics")
        })
    });

    group.finish();
}

criterion_group!(benches, walk_variants, repetition_batches);
criterion_main!(benches);
