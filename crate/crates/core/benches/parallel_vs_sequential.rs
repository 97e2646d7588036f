use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cmps_echo::disentangler::Disentangler;
use cmps_echo::mps::Mps;
use cmps_echo::overlap::overlap_sampling;
use cmps_echo::{CliffordGate, Execution, Sites, StabilizerTableau};
use ndarray::Array3;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ghz_like(n: usize) -> StabilizerTableau {
    let mut t = StabilizerTableau::new_zero_state(n).unwrap();
    t.apply_gate(&CliffordGate::hadamard(), &Sites::One(0)).unwrap();
    for j in 0..n - 1 {
        t.apply_gate(&CliffordGate::cx(), &Sites::Two(j, j + 1)).unwrap();
    }
    t
}

fn bench_sampling(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 16;
    let phi = Mps::random(n, 16, &mut rng);
    let s = ghz_like(n);
    let mut g = c.benchmark_group("overlap_sampling");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 20_000), |b| {
            b.iter(|| overlap_sampling(black_box(&s), black_box(&phi), 20_000, 3, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_candidates(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let theta = Array3::from_shape_fn((16, 4, 16), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let mut g = c.benchmark_group("candidate_costs");
    for (name, execution) in MODES {
        let d = Disentangler { execution, ..Disentangler::default() };
        g.bench_function(name, |b| b.iter(|| d.candidate_costs(black_box(&theta))));
    }
    g.finish();
}

criterion_group!(benches, bench_sampling, bench_candidates);
criterion_main!(benches);
