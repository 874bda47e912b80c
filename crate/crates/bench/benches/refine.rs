use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use relwl_bench::{gnn_workload, sparse_graph};
use relwl_core::families::gen_lifted;
use relwl_core::gnn::{compgcn_forward, rgcn_forward, Activation, Composition};
use relwl_core::wl::{distinguish, stable_coloring, RefineOptions, Variant};

fn vertex_refinement(c: &mut Criterion) {
    let mut group = c.benchmark_group("stable_coloring");
    group.sample_size(10);
    for &n in &[1_000usize, 10_000] {
        let g = sparse_graph(n, 5 * n, 10, 1);
        for variant in [Variant::OneWl, Variant::WeakOneRwl, Variant::OneRwl] {
            group.bench_with_input(BenchmarkId::new(variant.name(), n), &g, |b, g| {
                b.iter(|| {
                    stable_coloring(black_box(g), variant, 1, &RefineOptions::default()).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn tuple_refinement(c: &mut Criterion) {
    let mut group = c.benchmark_group("krlwl_lifted");
    group.sample_size(10);
    let (g, h) = gen_lifted(2, 3).unwrap();
    for k in [2usize, 3] {
        group.bench_function(BenchmarkId::from_parameter(k), |b| {
            b.iter(|| {
                distinguish(
                    black_box(&g),
                    &h,
                    Variant::KRlwl,
                    k,
                    &RefineOptions::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    group.sample_size(20);
    let w = gnn_workload(10_000, 50_000, 4, 32, Composition::Mult);
    group.bench_function("rgcn", |b| {
        b.iter(|| {
            rgcn_forward(&w.graph, &w.rgcn, black_box(&w.features), Activation::Relu).unwrap()
        })
    });
    group.bench_function("compgcn_mult", |b| {
        b.iter(|| {
            compgcn_forward(
                &w.graph,
                &w.compgcn,
                black_box(&w.features),
                Activation::Relu,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, vertex_refinement, tuple_refinement, forward);
criterion_main!(benches);
