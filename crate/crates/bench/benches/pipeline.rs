use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gdof_bench::{corner_scheme, sample, sample_params};
use gdof_core::kuser::{outer_bounds_from_catalog, GenerationBudget, PatternCatalog};
use gdof_core::{achievability_verdict, full_region_d123, full_region_f123, outer_region, simulate_scheme, SimConfig};

fn elimination(c: &mut Criterion) {
    let (ch, p) = (sample(), sample_params());
    let mut g = c.benchmark_group("elimination");
    g.sample_size(20);
    g.bench_function("full_region_d123", |b| b.iter(|| full_region_d123(black_box(&ch), black_box(&p)).unwrap()));
    g.bench_function("full_region_f123", |b| b.iter(|| full_region_f123(black_box(&ch), black_box(&p)).unwrap()));
    g.finish();
}

fn regions(c: &mut Criterion) {
    let ch = sample();
    c.bench_function("outer_region", |b| b.iter(|| outer_region(black_box(&ch)).unwrap()));
    let mut g = c.benchmark_group("verdict");
    g.sample_size(20);
    g.bench_function("achievability_verdict", |b| b.iter(|| achievability_verdict(black_box(&ch)).unwrap()));
    g.finish();
}

fn kbounds(c: &mut Criterion) {
    let ch = sample();
    let mut g = c.benchmark_group("kbounds");
    g.sample_size(10);
    g.bench_function("catalog_k3", |b| b.iter(|| PatternCatalog::build(3, GenerationBudget::default()).unwrap()));
    let catalog = PatternCatalog::build(3, GenerationBudget::default()).unwrap();
    g.bench_function("evaluate_k3", |b| b.iter(|| outer_bounds_from_catalog(black_box(&ch), &catalog).unwrap()));
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let s = corner_scheme();
    let cfg = SimConfig::default();
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("corner_200_trials", |b| b.iter(|| simulate_scheme(black_box(&s), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, elimination, regions, kbounds, simulation);
criterion_main!(benches);
