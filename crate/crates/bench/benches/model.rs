use budyko::bifurcation::{detect_folds_a, sweep_d, uniform_grid};
use budyko::manifold::{constants, graph_transform, sampled_h0};
use budyko::reduced::{find_equilibria, z};
use budyko::{ForcingTable, ModelParams};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn reduced(c: &mut Criterion) {
    let t = ForcingTable::new(ModelParams::default()).unwrap();
    c.bench_function("z", |b| b.iter(|| z(&t, black_box(0.42))));
    c.bench_function("find_equilibria", |b| b.iter(|| find_equilibria(&t, 0.0, 1.0).unwrap()));
}

fn bifurcation(c: &mut Criterion) {
    let t = ForcingTable::new(ModelParams::default()).unwrap();
    c.bench_function("detect_folds_a", |b| b.iter(|| detect_folds_a(&t, 2000)));
    let grid = uniform_grid(0.2, 0.5, 0.005);
    c.bench_function("sweep_d/61", |b| b.iter(|| sweep_d(&t, &grid).unwrap()));
}

fn manifold(c: &mut Criterion) {
    let t = ForcingTable::new(ModelParams::default()).unwrap();
    let eps = constants(&t).eps_max / 2.0;
    let g = sampled_h0(&t);
    c.bench_function("graph_transform", |b| b.iter(|| graph_transform(&t, &g, eps).unwrap()));
}

criterion_group!(benches, reduced, bifurcation, manifold);
criterion_main!(benches);
