use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linrec::campaign::{cells_of, CampaignPolicy, CellContext, CellId, PairState};
use linrec::chain::{derive_chain, finiteness_bound, ProblemInstance};
use linrec::par;

fn grid(c: &mut Criterion) {
    let inst = ProblemInstance::zeckendorf_binary(4, 1).unwrap();
    let chain = derive_chain(&inst).unwrap();
    let n = finiteness_bound(&chain).unwrap().n1_bound.hi().to_integer().unwrap();
    let ctx = CellContext::new(&inst, &chain, &n, &CampaignPolicy::default()).unwrap();
    let state = PairState { pair: (4, 2), n_caps: vec![319, 330], m_caps: vec![] };
    let cells: Vec<CellId> = cells_of(&state, 2, 1).step_by(97).take(512).collect();

    let mut g = c.benchmark_group("reduce_cell_grid");
    g.sample_size(10);
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    for jobs in [1, threads] {
        let name = if jobs == 1 { "sequential" } else { "parallel" };
        g.bench_with_input(BenchmarkId::new(name, jobs), &jobs, |b, &jobs| {
            b.iter(|| par::with_jobs(jobs, || par::map(black_box(&cells), |id| ctx.reduce_cell(id))))
        });
    }
    g.finish();
}

criterion_group!(benches, grid);
criterion_main!(benches);
