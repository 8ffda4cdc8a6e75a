use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use xtorsion::colimit::{lower_triangular_vanishing, random_two_block, BlockStep};
use xtorsion::linear_model::compose::IsotopyFamily;
use xtorsion::linear_model::axiom_suite;
use xtorsion::simplex_paths::functoriality_sweep;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    vec![
        ("1-thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("rayon-{all}"), ThreadPoolBuilder::new().num_threads(all).build().unwrap()),
    ]
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("functoriality_sweep");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| functoriality_sweep(2, 4, 7)))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("axiom_suite");
    group.sample_size(10);
    let family = IsotopyFamily::reeb(1);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| axiom_suite(&family, (0.05, 2.95), 24).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("lower_triangular_vanishing");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let diagram = random_two_block(&mut rng, 3, 8, &[BlockStep::Push, BlockStep::Kill, BlockStep::Kill], false).unwrap();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| lower_triangular_vanishing(&diagram).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
