use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rwn_bench::{backends, fixture};
use rwn_core::neighborhoods::{build, sample_pairs};
use rwn_core::{perturb, RwnConfig};

fn neighborhood_builds(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    for n in [1_000usize, 2_000, 4_000] {
        let (_, spec) = fixture(n, 4);
        group.throughput(Throughput::Elements(n as u64));
        for (name, backend) in backends(100, 4) {
            group.bench_with_input(BenchmarkId::new(name, n), &backend, |b, backend| {
                b.iter(|| build(&spec, backend, 0.0, 5, 1).unwrap())
            });
        }
    }
    group.finish();
}

fn pair_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_pairs");
    for (n, m) in [(10_000usize, 10usize), (100_000, 10), (1_000, 900)] {
        group.bench_function(format!("n{n}_m{m}"), |b| {
            b.iter(|| sample_pairs(black_box(n), m, 7).unwrap())
        });
    }
    group.finish();
}

fn perturbation(c: &mut Criterion) {
    let (d, spec) = fixture(4_000, 4);
    let ns = build(&spec, &backends(100, 4)[2].1, 0.0, 5, 1).unwrap();
    let cfg = RwnConfig::new(0.0, 5, 0.5, 3);
    c.bench_function("perturb_4000x4", |b| b.iter(|| perturb(&d, &ns, &cfg).unwrap()));
}

criterion_group!(benches, neighborhood_builds, pair_sampling, perturbation);
criterion_main!(benches);
