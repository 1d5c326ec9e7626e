//! Batch-pipeline benchmarks: the same 70-run analysis on a single rayon
//! thread (sequential baseline) and on the default thread pool.
//!
//! Run with `cargo bench -p blscale`. The `parallel` feature must be on
//! (it is by default); the sequential baseline is produced by installing a
//! one-thread pool around the same code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use blscale::report::{analyze_profiles, AnalysisConfig};
use blscale::synthetic::{generate, GeneratorSpec, GridSpec, ProfileModel};
use blscale::{RunMetadata, VelocityProfile};

fn batch(n_runs: usize, n_points: usize) -> Vec<VelocityProfile> {
    (0..n_runs)
        .map(|i| {
            let ln_re = 9.0 + 3.0 * i as f64 / (n_runs - 1) as f64;
            let meta = RunMetadata::new(
                12000.0 + 200.0 * i as f64,
                15.0,
                0.5,
                1.5e-5,
                format!("run{i:02}"),
            )
            .unwrap();
            let spec = GeneratorSpec::new(
                ProfileModel::ScalingLaw { ln_re },
                GridSpec::new(100.0, 20000.0, n_points).unwrap(),
                meta,
            )
            .with_noise(0.01, 4000 + i as u64);
            generate(&spec).unwrap()
        })
        .collect()
}

fn bench_batch_analysis(c: &mut Criterion) {
    let config = AnalysisConfig::default();
    let mut group = c.benchmark_group("analyze_batch_70_runs");
    for &n_points in &[60usize, 200] {
        let profiles = batch(70, n_points);

        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_with_input(
            BenchmarkId::new("sequential_1_thread", n_points),
            &profiles,
            |b, profiles| {
                b.iter(|| {
                    single.install(|| analyze_profiles(profiles.clone(), &config))
                })
            },
        );
        group.bench_with_input(
            BenchmarkId::new("parallel_default_pool", n_points),
            &profiles,
            |b, profiles| b.iter(|| analyze_profiles(profiles.clone(), &config)),
        );
    }
    group.finish();
}

fn bench_single_run(c: &mut Criterion) {
    let config = AnalysisConfig::default();
    let profile = batch(1, 200).pop().unwrap();
    c.bench_function("analyze_run_200_points", |b| {
        b.iter(|| blscale::report::analyze_run(profile.clone(), &config).unwrap())
    });
}

criterion_group!(benches, bench_batch_analysis, bench_single_run);
criterion_main!(benches);
