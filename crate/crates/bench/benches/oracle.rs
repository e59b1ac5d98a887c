use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use innosearch_bench::reference;
use innovation_search::{best_assignment, DiscreteInstance, DEFAULT_BUDGET};

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("best_assignment");
    group.sample_size(10);
    for (slots, horizon) in [(6, 3), (8, 2), (10, 3)] {
        let inst = DiscreteInstance::from_model(&reference(), slots, horizon).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("N{slots}_T{horizon}")),
            &inst,
            |b, inst| b.iter(|| best_assignment(black_box(inst), DEFAULT_BUDGET).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
