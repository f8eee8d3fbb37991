use linpres::combinat::{all_bipartitions, is_separating, s_of_n};
use linpres::equations::{apply_factor_action, multilinear_rank, random_ambient_point, transvection, SecantSampler};
use linpres::interpolate::{build_candidate_basis, verify_invariant, BasisOptions, VerifyTrials};
use linpres::poly::{lie_action, rat, Poly};
use linpres::stabilizer::{bracket_closure_check, stabilize_single_invariant};
use linpres::tensor::{enumerate_monomials, enumerate_weight_zero, is_weight_zero, Monomial};
use linpres::{FactorMode, PrimeSet, SparseMatrix, TensorFormat, WeylMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_format() -> impl Strategy<Value = TensorFormat> {
    prop::collection::vec((1usize..=3, 1usize..=2), 1..=3)
        .prop_map(|v| TensorFormat::new(v.iter().map(|x| x.0).collect(), v.iter().map(|x| x.1).collect()).unwrap())
        .prop_filter("small ambient space", |f| f.ambient_dimension() <= 24)
}

fn poly_in(n: usize, degree: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0..n as u32, degree), -4i64..=4), 1..5)
        .prop_map(move |ts| Poly::from_terms(degree, ts.into_iter().map(|(v, c)| (Monomial::from_vars(v), rat(c)))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_zero_matches_filter(f in small_format(), delta in 1usize..=4) {
        let fast = enumerate_weight_zero(&f, delta);
        let slow: Vec<Monomial> = enumerate_monomials(&f, delta, 1 << 20)
            .unwrap()
            .into_iter()
            .filter(|m| is_weight_zero(m, &f))
            .collect();
        let mut fast_sorted = fast.clone();
        fast_sorted.sort();
        prop_assert_eq!(fast_sorted, slow);
    }

    #[test]
    fn leibniz(f in poly_in(4, 2), g in poly_in(4, 1), entries in prop::collection::vec((0usize..4, 0usize..4, -3i64..=3), 1..6)) {
        let mut a = SparseMatrix::new(4, 4);
        for (r, c, x) in entries {
            a.set(r, c, rat(x));
        }
        let lhs = lie_action(&a, &f.mul(&g)).unwrap();
        let rhs = lie_action(&a, &f).unwrap().mul(&g).add(&f.mul(&lie_action(&a, &g).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bound_matches_brute_force(dims in prop::collection::vec(1usize..=4, 2..=4)) {
        let k = dims.len();
        let all = all_bipartitions(k).unwrap();
        let mut best = 0;
        for mask in 1u64..(1 << all.len()) {
            let coll: Vec<_> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
            if is_separating(&coll, k) {
                best = best.max(coll.iter().map(|b| b.value(&dims)).min().unwrap());
            }
        }
        prop_assert_eq!(s_of_n(&dims).unwrap().s, best);
    }

    #[test]
    fn multilinear_rank_is_basis_independent(seed in 0u64..1000, r in 1usize..=3) {
        let f = TensorFormat::multilinear(vec![2, 3, 3]).unwrap();
        let mut sampler = SecantSampler::new(&f, r, seed, 5);
        let mut p = sampler.next_point();
        let before = multilinear_rank(&p, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..3 {
            let n = f.dims()[i];
            for (a, b) in [(0, 1), (1, 0)] {
                let lambda = rat(rand::Rng::gen_range(&mut rng, 1..=3));
                p = apply_factor_action(&p, &f, i, &transvection(n, a % n, b % n, lambda)).unwrap();
            }
        }
        prop_assert_eq!(multilinear_rank(&p, &f).unwrap(), before);
    }
}

#[test]
fn skew_candidates_are_alternating() {
    // transposition negates every skew candidate
    let f = TensorFormat::multilinear(vec![3, 3]).unwrap();
    let opts = BasisOptions {
        weyl: WeylMode::Off,
        factor: FactorMode::Skew,
        ..BasisOptions::default()
    };
    let basis = build_candidate_basis(&f, 3, &opts).unwrap();
    let swap: Vec<usize> = (0..9).map(|c| (c % 3) * 3 + c / 3).collect();
    for e in &basis.elements {
        assert_eq!(e.permute_vars(&swap), e.neg());
        assert!(e.terms().all(|(m, _)| is_weight_zero(m, &f)));
    }
}

#[test]
fn random_forms_are_not_invariants() {
    let f = TensorFormat::multilinear(vec![2, 2]).unwrap();
    let x = |i| Poly::var(i);
    let g = x(0).mul(&x(3)).add(&x(1).mul(&x(2)));
    let v = verify_invariant(&g, &f, 1, 3, VerifyTrials::default()).unwrap();
    assert!(!v.all_passed());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = random_ambient_point(&f, &mut rng, 10);
    assert_eq!(p.len(), 4);
}

#[test]
fn determinant_stabilizers() {
    // det_n is stabilized by sl_n × sl_n plus scalars: 2(n²−1)+1
    for n in [2usize, 3] {
        let f = TensorFormat::multilinear(vec![n, n]).unwrap();
        let flat = linpres::equations::bipartition_flattening(&f, &linpres::Bipartition::parse("1|2", 2).unwrap()).unwrap();
        let det = linpres::equations::minors(&flat, n).remove(0);
        let (rep, lb) = stabilize_single_invariant(&det, &f, &PrimeSet::auto(1)).unwrap();
        assert_eq!(rep.dim_actual, 2 * (n * n - 1) + 1);
        assert!(bracket_closure_check(&lb));
    }
}
