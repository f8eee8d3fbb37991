use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use linpres::combinat::s_of_n;
use linpres::equations::secant_degree_component;
use linpres::interpolate::{build_candidate_basis, interpolate_invariant, BasisOptions};
use linpres::linalg::{ModEchelon, PrimeSet};
use linpres::stabilizer::lie_annihilator;
use linpres::{FactorMode, InterpolationConfig, TensorFormat, WeylMode};
use linpres_bench::{multilinear, secant_ideal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bound(c: &mut Criterion) {
    c.bench_function("s_of_n 3,3,3,3", |b| b.iter(|| s_of_n(black_box(&[3, 3, 3, 3])).unwrap()));
    c.bench_function("s_of_n 2^6", |b| b.iter(|| s_of_n(black_box(&[2; 6])).unwrap()));
}

fn equations(c: &mut Criterion) {
    let f = multilinear(&[2, 2, 2, 3]);
    c.bench_function("3x3 minors 2,2,2,3", |b| b.iter(|| secant_degree_component(black_box(&f), 2).unwrap()));
}

fn stabilizer(c: &mut Criterion) {
    let mut g = c.benchmark_group("stabilizer");
    g.sample_size(10);
    for dims in [vec![2, 2, 2, 2], vec![2, 2, 2, 3]] {
        let (f, comp) = secant_ideal(&dims, 2);
        g.bench_function(format!("sigma_2 {dims:?}"), |b| b.iter(|| lie_annihilator(black_box(&comp), &f).unwrap()));
    }
    g.finish();
}

fn modular(c: &mut Criterion) {
    let p = PrimeSet::auto(0).primes()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<u64>> = (0..300).map(|_| (0..300).map(|_| rng.gen_range(0..p)).collect()).collect();
    c.bench_function("mod-p echelon 300x300", |b| {
        b.iter(|| {
            let mut e = ModEchelon::new(300, p);
            for r in &rows {
                e.insert(r.clone());
            }
            e.rank()
        })
    });
}

fn interpolation(c: &mut Criterion) {
    let mut g = c.benchmark_group("interpolate");
    g.sample_size(10);
    let f33 = multilinear(&[3, 3]);
    g.bench_function("det3", |b| b.iter(|| interpolate_invariant(&f33, &InterpolationConfig::new(2, 3, 11), &PrimeSet::auto(11)).unwrap()));
    let cubic = TensorFormat::new(vec![3], vec![3]).unwrap();
    g.bench_function("aronhold", |b| b.iter(|| interpolate_invariant(&cubic, &InterpolationConfig::new(3, 4, 5), &PrimeSet::auto(5)).unwrap()));
    let strassen = multilinear(&[3, 3, 3]);
    let opts = BasisOptions {
        weyl: WeylMode::Signed,
        factor: FactorMode::Skew,
        ..BasisOptions::default()
    };
    g.bench_function("strassen candidates", |b| b.iter(|| build_candidate_basis(&strassen, 9, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, bound, equations, stabilizer, modular, interpolation);
criterion_main!(benches);
