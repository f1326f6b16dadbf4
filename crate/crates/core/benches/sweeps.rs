use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use picod::instance::build_complete_s;
use picod::mais::{min_mais, MinMaisMode};
use picod::verify::{verify_claim3, verify_claim4, Budget};
use picod::Exec;

const STRATEGIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn min_mais_critical(c: &mut Criterion) {
    let mut group = c.benchmark_group("min_mais_critical");
    group.sample_size(10);
    for s in [1u8, 2] {
        let inst = build_complete_s(2 * s + 1, &[s].into_iter().collect()).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, s), &inst, |b, inst| {
                b.iter(|| {
                    min_mais(inst, MinMaisMode::Exhaustive { budget: 1_000_000 }, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn claim4_tuples(c: &mut Criterion) {
    let mut group = c.benchmark_group("claim4");
    group.sample_size(10);
    for s in [3u8, 4] {
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, s), &s, |b, &s| {
                b.iter(|| verify_claim4(s, 4, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn claim3_intersections(c: &mut Criterion) {
    let mut group = c.benchmark_group("claim3");
    group.sample_size(10);
    let budget = Budget::default().unlimited_time();
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, 2), |b| {
            b.iter(|| verify_claim3(2, budget, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    min_mais_critical,
    claim4_tuples,
    claim3_intersections
);
criterion_main!(benches);
