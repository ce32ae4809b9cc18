use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kp_core::correlators::{s_n_terms, Exec, ExpansionConfig};

fn cyclic_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("s_n_terms");
    group.sample_size(10);
    for (n, dmax) in [(4usize, 5i64), (5, 4)] {
        for (label, exec) in [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)] {
            let cfg = ExpansionConfig {
                sorted: true,
                exec,
                ..ExpansionConfig::window(n, dmax + 2, dmax as u32 + 6)
            };
            group.bench_with_input(BenchmarkId::new(label, format!("n{n}_dmax{dmax}")), &cfg, |b, cfg| {
                b.iter(|| s_n_terms(cfg).expect("expansion"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, cyclic_sum);
criterion_main!(benches);
