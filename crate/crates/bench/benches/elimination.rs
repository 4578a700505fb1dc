use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use segdesc_bench::{dense_system, sales_manager};
use segdesc_core::analysis::RelationKind;
use segdesc_core::{segment, Mode, Policy, SegmentOptions};

fn policies(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_system");
    group.sample_size(20);
    for rows in [6, 8, 10] {
        let (ineqs, ord) = dense_system(4, rows, 7);
        for policy in [Policy::KeepAll, Policy::DropDuplicates, Policy::BoundsMethod] {
            let id = BenchmarkId::new(policy.name(), rows);
            group.bench_with_input(id, &rows, |b, _| {
                b.iter(|| segment(ineqs.clone(), ord.clone(), SegmentOptions::new(Mode::StopAtFirst, policy)))
            });
        }
    }
    group.finish();
}

fn worked_example(c: &mut Criterion) {
    let mut group = c.benchmark_group("sales_manager");
    group.sample_size(10);
    group.bench_function("consistency", |b| b.iter(|| sales_manager("sales-manager-iter2").is_consistent()));
    group.bench_function("explain_all", |b| {
        let a = sales_manager("sales-manager-iter1");
        b.iter(|| a.check_consistency(Mode::EnumerateAll))
    });
    group.bench_function("necessary_pair_cached_base", |b| {
        let a = sales_manager("sales-manager-iter2");
        a.base().expect("base");
        b.iter(|| a.robust_relation(RelationKind::Necessary, 13, 0))
    });
    group.bench_function("relation_matrices", |b| b.iter(|| sales_manager("sales-manager-iter2").relation_matrices()));
    group.finish();
}

criterion_group!(benches, policies, worked_example);
criterion_main!(benches);
