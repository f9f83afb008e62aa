use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcsim_bench::{fixtures, settings};
use mcsim_core::sim::{self, SolverKind};

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for (name, problem) in fixtures() {
        for kind in SolverKind::ALL {
            let s = settings(kind);
            group.bench_with_input(BenchmarkId::new(kind.to_string(), name), &problem, |b, p| {
                b.iter(|| sim::solve(p, None, &s).expect("solve"));
            });
        }
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
