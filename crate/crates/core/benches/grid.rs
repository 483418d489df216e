//! Sequential vs rayon execution for the two data-parallel workloads:
//! the calibration grid search and batch fixed-point verification.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use growthcal::calibrate::{self, FixedParams, GridSpec, MomentTargets, Weights};
use growthcal::model::ModelParams;
use growthcal::simulate;
use growthcal::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn grid_search(c: &mut Criterion) {
    let fixed = FixedParams {
        alpha: 0.33,
        delta: 0.05,
        g: 0.02,
    };
    let targets = MomentTargets::new(0.21, 2.63).unwrap();
    let grid = GridSpec::default();
    let weights = Weights::default();
    let mut group = c.benchmark_group("grid_search_default");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                calibrate::grid_search_with(black_box(&targets), &grid, &fixed, &weights, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn verify_batch(c: &mut Criterion) {
    // A deterministic sweep over β and γ at Iran-like fixed parameters.
    let params: Vec<ModelParams> = (0..32)
        .map(|i| {
            let beta = 0.90 + 0.002 * (i % 16) as f64;
            let gamma = if i < 16 { 0.4 } else { 1.8 };
            ModelParams::with_rate(0.34, beta, gamma, 0.05, 0.02).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("verify_many");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, params.len()), &params, |b, p| {
            b.iter(|| simulate::verify_many(black_box(p), 1e-3, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, grid_search, verify_batch);
criterion_main!(benches);
