use criterion::{criterion_group, criterion_main, Criterion};
use parplan_domains::{generate, DomainKind, Params};
use parplan_harness::runner::run_grid;
use parplan_harness::sources::Models;
use parplan_harness::{AlgoKind, Execution, Guide, RunConfig, Source};
use parplan_domains::PartialKind;

fn bench_runner(c: &mut Criterion) {
    let insts = generate(&Params::dataset(DomainKind::Grid, "default").unwrap(), 1, 16).unwrap();
    let runs = vec![
        RunConfig::new("ff", AlgoKind::Gbfs, vec![Guide::heuristic(Source::FfFull)]).unwrap(),
        RunConfig::new("keys", AlgoKind::Gbfs, vec![Guide::heuristic(Source::FfPartial(PartialKind::Keys))]).unwrap(),
    ];
    let models = Models::new(DomainKind::Grid);
    let mut g = c.benchmark_group("grid-default-16");
    g.sample_size(10);
    for (name, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut n = 0;
                run_grid(&insts, &runs, &models, 10_000, mode, |_| {
                    n += 1;
                    Ok(())
                })
                .unwrap();
                n
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_runner);
criterion_main!(benches);
