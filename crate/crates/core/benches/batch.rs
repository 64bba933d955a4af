use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasepotts::graph::kings_graph;
use phasepotts::oracle::brute_force_maxcut;
use phasepotts::{solve_batch, BatchSpec, DynamicsParams, Execution, Solver, StagePlan};

fn batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_batch");
    group.sample_size(10);
    for side in [7usize, 14] {
        let g = kings_graph(side).unwrap();
        let solver = Solver::new(&g, DynamicsParams::default(), StagePlan::default()).unwrap();
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let spec = BatchSpec { iterations: 8, execution, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, side * side), &spec, |b, spec| {
                b.iter(|| solve_batch(&solver, spec).unwrap())
            });
        }
    }
    group.finish();
}

fn maxcut(c: &mut Criterion) {
    let g = kings_graph(4).unwrap();
    c.bench_function("brute_force_maxcut/16", |b| b.iter(|| brute_force_maxcut(&g).unwrap()));
}

criterion_group!(benches, batches, maxcut);
criterion_main!(benches);
