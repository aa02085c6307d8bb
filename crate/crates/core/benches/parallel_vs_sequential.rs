use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdeco_core::decoherence::{spin_bath_evolve_with, time_grid, SpinBathModel};
use qdeco_core::field_decoherence::{coherence_length_sweep, thermal_sweep, ThermalModel};
use qdeco_core::lattice_qed::identity_check;
use qdeco_core::Execution;

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn dephasing(c: &mut Criterion) {
    let mut group = c.benchmark_group("spin_bath_evolve");
    let times = time_grid(20.0, 100).unwrap();
    for spins in [6usize, 10] {
        let couplings = (0..spins).map(|k| 0.2 + 0.15 * k as f64).collect();
        let model = SpinBathModel::equal_weights(couplings).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, spins), &model, |b, m| {
                b.iter(|| spin_bath_evolve_with(black_box(m), &times, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn gauge_identity(c: &mut Criterion) {
    let mut group = c.benchmark_group("identity_check");
    group.sample_size(10);
    for (sites, e_max) in [(2usize, 2i64), (3, 2)] {
        let label = format!("N{sites}_E{e_max}");
        for (name, exec) in STRATEGIES {
            group.bench_function(BenchmarkId::new(name, &label), |b| {
                b.iter(|| identity_check(sites, e_max, 50, 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn field_sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_sweeps");
    let fields: Vec<f64> = (0..10_000).map(|k| 1e3 * 1.001f64.powi(k)).collect();
    let times: Vec<f64> = (0..10_000).map(|k| 1e-3 * 1.0007f64.powi(k)).collect();
    let model = ThermalModel::default();
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, "coherence_length"), |b| {
            b.iter(|| coherence_length_sweep(black_box(&fields), 1.0, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new(name, "thermal"), |b| {
            b.iter(|| thermal_sweep(black_box(&times), &model, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dephasing, gauge_identity, field_sweeps);
criterion_main!(benches);
