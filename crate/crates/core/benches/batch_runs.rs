use criterion::{criterion_group, criterion_main, Criterion};
use stefan_front::par;
use stefan_front::solver::{self, InitialData, SolverConfig};
use stefan_front::Nonlinearity;

fn batch(c: &mut Criterion) {
    let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
    let configs: Vec<SolverConfig> = (1..=16)
        .map(|k| {
            let mut cfg = SolverConfig::new(nl.clone(), 2.0, 1.0, InitialData::CosineBump { sigma: 0.25 * k as f64 });
            cfg.params.n = 101;
            cfg.params.t_max = 5.0;
            cfg.params.early_stop = false;
            cfg
        })
        .collect();
    let one = |cfg: &SolverConfig| solver::run(cfg).unwrap().last().h;

    let mut group = c.benchmark_group("batch_16_runs");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| par::map_seq(&configs, one)));
    group.bench_function("parallel", |b| b.iter(|| par::map(&configs, one)));
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
