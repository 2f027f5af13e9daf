//! Compares the rayon data-parallel paths against the sequential fallback
//! on the workloads that dominate batch studies: Monte Carlo count
//! sampling over many seeds and epsilon analysis over many tables.
//!
//! Requires the `parallel` feature (on by default):
//! `cargo bench -p ctk-core`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ctk_core::analyze::epsilon;
use ctk_core::quantum::{build_c7_realization, ideal_table};
use ctk_core::simulate::{sample_counts_batch, sample_counts_batch_seq};
use ctk_core::table::{Inequality, ProbabilityTable};

fn batch_sampling(c: &mut Criterion) {
    let ideal = ideal_table(&build_c7_realization(), Inequality::C7).unwrap();
    let mut group = c.benchmark_group("sample_counts_batch");
    for n_seeds in [64usize, 512] {
        let seeds: Vec<u64> = (0..n_seeds as u64).collect();
        group.bench_with_input(BenchmarkId::new("parallel", n_seeds), &seeds, |b, seeds| {
            b.iter(|| sample_counts_batch(black_box(&ideal), 1e5, seeds).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", n_seeds),
            &seeds,
            |b, seeds| b.iter(|| sample_counts_batch_seq(black_box(&ideal), 1e5, seeds).unwrap()),
        );
    }
    group.finish();
}

fn batch_epsilon(c: &mut Criterion) {
    use rayon::prelude::*;
    let ideal = ideal_table(&build_c7_realization(), Inequality::C7).unwrap();
    let seeds: Vec<u64> = (0..256).collect();
    let tables: Vec<ProbabilityTable> = sample_counts_batch(&ideal, 1e5, &seeds).unwrap();

    let mut group = c.benchmark_group("epsilon_batch");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            tables
                .par_iter()
                .map(|t| epsilon(t).unwrap().epsilon)
                .sum::<f64>()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            tables
                .iter()
                .map(|t| epsilon(t).unwrap().epsilon)
                .sum::<f64>()
        })
    });
    group.finish();
}

criterion_group!(benches, batch_sampling, batch_epsilon);
criterion_main!(benches);
