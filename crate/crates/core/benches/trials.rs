use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phonecall::harness::{run_trials, Execution, ExperimentSpec};
use phonecall::Protocol;

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for protocol in [Protocol::RegularPull, Protocol::RegularPushThenPull] {
        let spec = ExperimentSpec { protocol, n: 1 << 14, trials: 32, seed: 1, ..Default::default() };
        for (name, exec) in [("sequential", Execution::Sequential), ("pool", Execution::Pool)] {
            group.bench_with_input(BenchmarkId::new(name, protocol), &spec, |b, spec| {
                b.iter(|| run_trials(spec, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
