use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mted_core::distance::{edit_distance, SolverConfig};
use mted_core::simulation;
use mted_core::{random, WeightedTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs(edges: usize, count: usize) -> Vec<(WeightedTree, WeightedTree)> {
    let mut rng = ChaCha8Rng::seed_from_u64(edges as u64);
    (0..count)
        .map(|_| (random::weighted_tree(&mut rng, edges, 0.1, 2.0), random::weighted_tree(&mut rng, edges, 0.1, 2.0)))
        .collect()
}

fn edit_distance_by_size(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("edit_distance");
    for edges in [4, 8, 12, 16] {
        let data = pairs(edges, 8);
        group.bench_with_input(BenchmarkId::from_parameter(edges), &data, |b, data| {
            b.iter(|| {
                for (t, g) in data {
                    black_box(edit_distance(t, g, &cfg).unwrap().value);
                }
            })
        });
    }
    group.finish();
}

fn simulation_matrix(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("peaks_11", |b| b.iter(|| black_box(simulation::run(11, &cfg).unwrap())));
    group.finish();
}

criterion_group!(benches, edit_distance_by_size, simulation_matrix);
criterion_main!(benches);
