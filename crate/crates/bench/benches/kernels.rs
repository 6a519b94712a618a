use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypercol_core::colouring::{count_colourings_exact, sample_planted_map};
use hypercol_core::cycles::count_loose_cycles;
use hypercol_core::hypergraph::{gen_multi, gen_planted};
use hypercol_core::moments::{landscape_scan, LandscapeSettings};
use hypercol_core::rigidity::extract_core;
use hypercol_core::thresholds::{fixed_point, lambda_r};
use hypercol_core::ModelParams;

fn core_stripping(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_core");
    for n in [10_000usize, 100_000] {
        let p = ModelParams::with_n(3, 3, 12.0, n).unwrap();
        let sigma = sample_planted_map(n, 3, 3, p.m().unwrap(), 1).unwrap();
        let h = gen_planted(&p, &sigma, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| extract_core(h, &sigma).unwrap()));
    }
    group.finish();
}

fn cycle_census(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_loose_cycles");
    for max_len in [3usize, 4] {
        let h = gen_multi(&ModelParams::with_n(3, 3, 0.5, 10_000).unwrap(), 1).unwrap();
        group.bench_with_input(BenchmarkId::new("n10000", max_len), &max_len, |b, &l| {
            b.iter(|| count_loose_cycles(&h, l).unwrap())
        });
    }
    group.finish();
}

fn thresholds(c: &mut Criterion) {
    c.bench_function("lambda_r grid", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for q in 3..=10u16 {
                for k in 3..=7usize {
                    s += lambda_r(black_box(q), black_box(k)).unwrap();
                }
            }
            s
        })
    });
    let p = ModelParams::new(3, 3, 12.0).unwrap();
    c.bench_function("fixed_point q3 k3 c12", |b| b.iter(|| fixed_point(black_box(&p)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let h = gen_multi(&ModelParams::with_edges(3, 3, 12, 12).unwrap(), 3).unwrap();
    c.bench_function("count_colourings_exact n12 m12", |b| b.iter(|| count_colourings_exact(&h, 3).unwrap()));
}

fn landscape(c: &mut Criterion) {
    let p = ModelParams::new(3, 3, 8.0).unwrap();
    let settings = LandscapeSettings { samples: 1000, path_points: 20, ..Default::default() };
    let mut group = c.benchmark_group("landscape");
    group.sample_size(10);
    group.bench_function("q3 1000 samples", |b| b.iter(|| landscape_scan(&p, &settings).unwrap()));
    group.finish();
}

criterion_group!(benches, core_stripping, cycle_census, thresholds, oracle, landscape);
criterion_main!(benches);
