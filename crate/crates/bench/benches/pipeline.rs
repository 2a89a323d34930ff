use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use htree_bench::{planted, standardized};
use htree_core::dtree::fit;
use htree_core::hcluster::ward_linkage;
use htree_core::{classify_row, train, TrainConfig, TreeConfig};

fn ward(c: &mut Criterion) {
    let mut group = c.benchmark_group("ward_linkage");
    group.sample_size(10);
    for n in [250, 500, 1000] {
        let (rows, _) = standardized(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &rows, |b, rows| {
            b.iter(|| ward_linkage(black_box(rows)).unwrap())
        });
    }
    group.finish();
}

fn tree_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree_fit");
    let config = TreeConfig::default();
    for n in [200, 1000, 5000] {
        let (rows, labels) = standardized(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(rows, labels), |b, (rows, labels)| {
            b.iter(|| fit(black_box(rows), black_box(labels), &config).unwrap())
        });
    }
    group.finish();
}

fn classify(c: &mut Criterion) {
    let data = planted(1000, 3);
    let model = train(&data, &TrainConfig::default()).unwrap();
    c.bench_function("classify_1000_rows", |b| {
        b.iter(|| {
            for row in &data.rows {
                black_box(classify_row(&model, black_box(row)).unwrap());
            }
        })
    });
}

criterion_group!(benches, ward, tree_fit, classify);
criterion_main!(benches);
