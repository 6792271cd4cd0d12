//! Parallel vs sequential throughput on the two fan-out workloads: the
//! AFC efficiency sweep and Monte-Carlo fit batches.
//!
//! Run with `cargo bench -p coherence`. Both paths compute identical
//! results; the comparison isolates the rayon speedup.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use coherence::afc::{simulate_storage, CombSpec, SimConfig};
use coherence::fitting::{lm_fit, FitOptions};
use coherence::models::{Mims, ModelFn, ToothShape};
use coherence::par;
use coherence::synth::{dataset_from_model, derive_seed, lin_spaced};

fn efficiency_sweep(c: &mut Criterion) {
    let cfg = SimConfig { grid_points: 1 << 14, ..Default::default() };
    let template = CombSpec {
        span_mhz: 12.0,
        delta_mhz: 1.0,
        finesse: 4.0,
        d_peak: 0.0,
        d0: 0.0,
        tooth_shape: ToothShape::Square,
    };
    let d_list: Vec<f64> = vec![0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0];
    let run_one = |d: &f64| {
        let spec = CombSpec { d_peak: template.d0 + d, ..template };
        simulate_storage(&spec, &cfg).unwrap().echo.efficiency
    };

    let mut group = c.benchmark_group("efficiency_sweep");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_collect_seq(&d_list, run_one))
    });
    group.bench_function("parallel", |b| b.iter(|| par::map_collect(&d_list, run_one)));
    group.finish();
}

fn monte_carlo_fits(c: &mut Criterion) {
    let truth = [1.0, 421.5, 1.3];
    let xs = lin_spaced(5.0, 520.0, 30);
    let seeds: Vec<u64> = (0..64).collect();
    let fit_one = |i: &u64| {
        let data = dataset_from_model(&Mims, &truth, &xs, 0.02, derive_seed(2024, *i)).unwrap();
        lm_fit(&Mims, &data, &FitOptions::default()).unwrap().params[1]
    };

    let mut group = c.benchmark_group("monte_carlo_mims");
    group.bench_function("sequential", |b| {
        b.iter_batched(|| seeds.clone(), |s| par::map_collect_seq(&s, fit_one), BatchSize::SmallInput)
    });
    group.bench_function("parallel", |b| {
        b.iter_batched(|| seeds.clone(), |s| par::map_collect(&s, fit_one), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, efficiency_sweep, monte_carlo_fits);
criterion_main!(benches);
