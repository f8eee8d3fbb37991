//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so each criterion reports on its own
//! line. The stretch criterion runs with `-- --include-ignored` (or
//! `--ignored`), or when `LINPRES_STRETCH=1` is set.

use std::time::{Duration, Instant};

use linpres::combinat::{all_bipartitions, is_separating, s_of_n};
use linpres::equations::{bipartition_flattening, minors, prolongation, secant_degree_component, segre_degree2_component, SecantSampler};
use linpres::interpolate::{interpolate_invariant, FactorMode, InterpolationConfig, WeylMode};
use linpres::linalg::{PrimeSet, SparseMatrix};
use linpres::poly::{echelonize, lie_action, rat, LinearSubspace, Poly};
use linpres::stabilizer::{bracket_closure_check, lie_annihilator, stabilize_single_invariant, stabilizer_report, Verdict};
use linpres::tensor::{Monomial, TensorFormat, DEFAULT_MONOMIAL_CAP};
use linpres::combinat::Bipartition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fmt(dims: &[usize]) -> TensorFormat {
    TensorFormat::multilinear(dims.to_vec()).unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    check(e <= limit, || format!("{what} took {e:.2?}, limit {limit:?}"))
}

/// max over separating collections of the min value, by brute force.
fn s_brute(dims: &[usize]) -> u128 {
    let k = dims.len();
    let all = all_bipartitions(k).unwrap();
    let mut best = 0;
    for mask in 1u64..(1 << all.len()) {
        let coll: Vec<Bipartition> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
        if is_separating(&coll, k) {
            best = best.max(coll.iter().map(|b| b.value(dims)).min().unwrap());
        }
    }
    best
}

fn criterion1() -> Outcome {
    let mut out = Vec::new();
    for (dims, s) in [(vec![2, 2, 2], 2), (vec![2, 2, 2, 2], 4), (vec![2, 3, 4], 3), (vec![3, 3, 3, 3], 9)] {
        let t = Instant::now();
        let rep = s_of_n(&dims).map_err(|e| e.to_string())?;
        within(t, Duration::from_secs(1), "s(n)")?;
        let brute = s_brute(&dims);
        check(rep.s == s && brute == s, || format!("s{dims:?}: got {}, brute force {brute}, want {s}", rep.s))?;
        check(is_separating(&rep.witness, dims.len()), || format!("witness for {dims:?} does not separate"))?;
        out.push(format!("s{dims:?}={} r<={}", rep.s, rep.guaranteed_r_max()));
    }
    Ok(out.join(", "))
}

fn criterion2() -> Outcome {
    let t = Instant::now();
    let f33 = fmt(&[3, 3]);
    let flat = bipartition_flattening(&f33, &Bipartition::parse("1|2", 2).unwrap()).unwrap();
    let two = echelonize(&minors(&flat, 2), 2).unwrap();
    let det3 = minors(&flat, 3).remove(0);
    let p = prolongation(&two, 1, &f33, DEFAULT_MONOMIAL_CAP).map_err(|e| e.to_string())?;
    check(two.dim() == 9, || format!("{} 2x2 minors", two.dim()))?;
    check(p.dim() == 1 && p.contains(&det3).unwrap(), || format!("prolongation has dim {}", p.dim()))?;
    let f22 = fmt(&[2, 2]);
    let det2 = echelonize(&[Poly::var(0).mul(&Poly::var(3)).sub(&Poly::var(1).mul(&Poly::var(2)))], 2).unwrap();
    let q = prolongation(&det2, 1, &f22, DEFAULT_MONOMIAL_CAP).map_err(|e| e.to_string())?;
    check(q.dim() == 0, || format!("det2 prolongation has dim {}", q.dim()))?;
    within(t, Duration::from_secs(5), "prolongations")?;
    Ok("<2x2 minors of 3x3>^(1) = <det3>, <det2>^(1) = 0".into())
}

/// Stabilizer of the degree r+1 minors of σ_r, with the sample and bracket checks.
fn secant_case(dims: &[usize], r: usize, want: usize, limit: Duration) -> Result<String, String> {
    let t = Instant::now();
    let f = fmt(dims);
    let comp = if r == 1 {
        segre_degree2_component(&f)
    } else {
        secant_degree_component(&f, r)
    }
    .map_err(|e| e.to_string())?;
    let (rep, lb) = stabilizer_report(&comp, &f, "minors", &[], &PrimeSet::auto(7)).map_err(|e| e.to_string())?;
    within(t, limit, &format!("{dims:?} r={r}"))?;
    check(rep.certified && rep.dim_actual == want, || format!("{dims:?} r={r}: dim {} (certified {}), want {want}", rep.dim_actual, rep.certified))?;
    check(bracket_closure_check(&lb), || format!("{dims:?} r={r}: not closed under brackets"))?;
    // every equation vanishes on 100 points of σ_r
    let mut sampler = SecantSampler::new(&f, r, 3, 10);
    for _ in 0..100 {
        let pt = sampler.next_point();
        check(comp.basis().all(|q| q.evaluate(&pt) == rat(0)), || format!("{dims:?} r={r}: an equation does not vanish on a sample"))?;
    }
    Ok(format!("{dims:?}/r{r}:{}[{}]", rep.dim_actual, comp.dim()))
}

fn criterion3() -> Outcome {
    let mut out = Vec::new();
    let minute = Duration::from_secs(60);
    let long = Duration::from_secs(20 * 60);
    for (dims, r, want, limit) in [
        (vec![2, 2], 1, 7, minute),
        (vec![2, 2, 2], 1, 10, minute),
        (vec![2, 2, 2, 2], 2, 13, minute),
        (vec![2, 2, 2, 3], 2, 18, minute),
        (vec![2, 2, 3, 3], 2, 23, long),
        (vec![2, 2, 2, 2], 3, 13, minute),
        (vec![2, 2, 2, 2, 2], 2, 16, long),
    ] {
        out.push(secant_case(&dims, r, want, limit)?);
    }
    // the three 4x4 determinants span a plane
    let comp = secant_degree_component(&fmt(&[2, 2, 2, 2]), 3).unwrap();
    check(comp.dim() == 2, || format!("sigma_3 component has dim {}", comp.dim()))?;
    Ok(out.join(" "))
}

fn criterion4() -> Outcome {
    let t = Instant::now();
    let f = fmt(&[2, 2, 5]);
    let comp = secant_degree_component(&f, 2).map_err(|e| e.to_string())?;
    let (rep, lb) = stabilizer_report(&comp, &f, "minors", &[], &PrimeSet::auto(7)).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(300), "(2,2,5)")?;
    check(bracket_closure_check(&lb), || "not closed under brackets".into())?;
    check(
        rep.dim_actual == 40 && rep.dim_expected == 31 && rep.verdict == Verdict::LargerThanExpected && rep.merged_match == Some(vec![4, 5]),
        || format!("dim {} expected {} verdict {} merged {:?}", rep.dim_actual, rep.dim_expected, rep.verdict.as_str(), rep.merged_match),
    )?;
    Ok(format!("dim 40 vs 31, {}, merged (4,5)", rep.verdict.as_str()))
}

fn det3() -> Poly {
    minors(&bipartition_flattening(&fmt(&[3, 3]), &Bipartition::parse("1|2", 2).unwrap()).unwrap(), 3).remove(0)
}

fn criterion5() -> Outcome {
    let t = Instant::now();
    let res = interpolate_invariant(&fmt(&[3, 3]), &InterpolationConfig::new(2, 3, 11), &PrimeSet::auto(11)).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(10), "det3 interpolation")?;
    let d = det3();
    check(res.weight_zero_count == 6 && res.kernel_dim == 1, || format!("weight zero {}, kernel {}", res.weight_zero_count, res.kernel_dim))?;
    check(res.invariant == d || res.invariant == d.neg(), || "recovered polynomial differs from det3".into())?;
    check(res.verification.all_passed(), || format!("{:?}", res.verification))?;
    Ok(format!(
        "6 weight-zero monomials, kernel 1, det3 up to sign, verification {}/{} {}/{} {}/{}",
        res.verification.vanishing_passed,
        res.verification.vanishing_trials,
        res.verification.nonvanishing_passed,
        res.verification.nonvanishing_trials,
        res.verification.sl_passed,
        res.verification.sl_trials
    ))
}

fn criterion6() -> Outcome {
    let t = Instant::now();
    let f = TensorFormat::new(vec![3], vec![3]).unwrap();
    let res = interpolate_invariant(&f, &InterpolationConfig::new(3, 4, 5), &PrimeSet::auto(5)).map_err(|e| e.to_string())?;
    let v = &res.verification;
    check(res.kernel_dim == 1 && v.all_passed() && v.vanishing_trials >= 100 && v.sl_trials >= 20, || format!("{v:?}"))?;
    let (rep, lb) = stabilize_single_invariant(&res.invariant, &f, &PrimeSet::auto(5)).map_err(|e| e.to_string())?;
    check(rep.dim_actual == 9 && rep.certified && bracket_closure_check(&lb), || format!("stabilizer dim {}", rep.dim_actual))?;
    within(t, Duration::from_secs(300), "Aronhold pipeline")?;
    Ok(format!("degree 4, {} terms, kernel 1, stabilizer 9", res.terms))
}

fn criterion7() -> Outcome {
    let mut out = Vec::new();
    for (dims, r, degree, want) in [(vec![3, 3, 3], 4, 9, 25), (vec![2, 2, 2, 2, 2], 5, 6, 16)] {
        let f = fmt(&dims);
        let mut cfg = InterpolationConfig::new(r, degree, 17);
        cfg.options.weyl = WeylMode::Signed;
        cfg.options.factor = FactorMode::Skew;
        let res = interpolate_invariant(&f, &cfg, &PrimeSet::auto(17)).map_err(|e| format!("{dims:?}: {e}"))?;
        let (rep, lb) = stabilize_single_invariant(&res.invariant, &f, &PrimeSet::auto(17)).map_err(|e| e.to_string())?;
        check(rep.dim_actual == want && rep.certified && bracket_closure_check(&lb), || format!("{dims:?}: stabilizer {}, want {want}", rep.dim_actual))?;
        out.push(format!("{dims:?} degree {degree}: {} candidates, {} terms, stabilizer {want}", res.candidates, res.terms));
    }
    // without compression the Strassen space trips the row cap
    let mut cfg = InterpolationConfig::new(4, 9, 17);
    cfg.trials.vanishing = 0;
    match interpolate_invariant(&fmt(&[3, 3, 3]), &cfg, &PrimeSet::auto(17)) {
        Err(linpres::Error::CapExceeded { required, .. }) => out.push(format!("raw Strassen aborts ({required} rows)")),
        other => return Err(format!("raw Strassen did not abort: {:?}", other.map(|r| r.terms))),
    }
    Ok(out.join("; "))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Poly {
    let terms = (0..rng.gen_range(1..=4)).map(|_| {
        let vars = (0..degree).map(|_| rng.gen_range(0..n as u32)).collect();
        (Monomial::from_vars(vars), rat(rng.gen_range(-5..=5)))
    });
    Poly::from_terms(degree, terms.collect::<Vec<_>>()).unwrap()
}

fn criterion8() -> Outcome {
    // Leibniz rule
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 5;
    for trial in 0..1000 {
        let mut a = SparseMatrix::new(n, n);
        for _ in 0..4 {
            a.set(rng.gen_range(0..n), rng.gen_range(0..n), rat(rng.gen_range(-3..=3)));
        }
        let (df, dg) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let f = random_poly(&mut rng, n, df);
        let g = random_poly(&mut rng, n, dg);
        let lhs = lie_action(&a, &f.mul(&g)).unwrap();
        let rhs = lie_action(&a, &f).unwrap().mul(&g).add(&f.mul(&lie_action(&a, &g).unwrap()));
        check(lhs == rhs, || format!("Leibniz rule fails in trial {trial}"))?;
    }

    // basis change: generic integer conjugations of the Segre (P^1)^3 quadrics
    let f = fmt(&[2, 2, 2]);
    let ideal = segre_degree2_component(&f).unwrap();
    let dim = lie_annihilator(&ideal, &f).unwrap().dim();
    for _ in 0..5 {
        let moved = conjugate(&ideal, 8, &mut rng);
        let lb = lie_annihilator(&moved, &f).map_err(|e| e.to_string())?;
        check(lb.dim() == dim && bracket_closure_check(&lb), || format!("conjugated dim {} vs {dim}", lb.dim()))?;
    }

    // seed independence
    let f33 = fmt(&[3, 3]);
    let a = interpolate_invariant(&f33, &InterpolationConfig::new(2, 3, 101), &PrimeSet::auto(101)).map_err(|e| e.to_string())?;
    let b = interpolate_invariant(&f33, &InterpolationConfig::new(2, 3, 202), &PrimeSet::auto(202)).map_err(|e| e.to_string())?;
    check(a.invariant.is_proportional(&b.invariant), || "det3 runs with disjoint seeds disagree".into())?;
    Ok(format!(
        "Leibniz 1000/1000, 5 conjugations keep dim {dim}, seeds proportional; brackets and samples checked in 3, 4, 6"
    ))
}

fn conjugate(ideal: &LinearSubspace, n: usize, rng: &mut ChaCha8Rng) -> LinearSubspace {
    let mut tri = |lower: bool| {
        let mut m = SparseMatrix::identity(n);
        for r in 0..n {
            for c in 0..n {
                if (lower && c < r) || (!lower && c > r) {
                    m.set(r, c, rat(rng.gen_range(-2..=2)));
                }
            }
        }
        m
    };
    let g = tri(true).matmul(&tri(false));
    let images: Vec<Poly> = (0..n)
        .map(|v| g.row(v).fold(Poly::zero(1), |p, (w, x)| p.add(&Poly::var(w).scale(x))))
        .collect();
    let moved: Vec<Poly> = ideal.basis().map(|q| q.substitute_linear(&images).unwrap()).collect();
    echelonize(&moved, ideal.degree()).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let stretch = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var("LINPRES_STRETCH").is_ok_and(|v| v == "1");
    let list = args.iter().any(|a| a == "--list");
    let criteria: [Criterion; 8] = [
        ("bound suite", criterion1),
        ("prolongation oracle", criterion2),
        ("stabilizer dimensions", criterion3),
        ("counter-example detection", criterion4),
        ("det3 interpolation", criterion5),
        ("Aronhold pipeline", criterion6),
        ("Strassen and Oeding-Sam (stretch)", criterion7),
        ("property suites", criterion8),
    ];
    if list {
        for (i, (name, _)) in criteria.iter().enumerate() {
            println!("criterion {}: {name}: test", i + 1);
        }
        return;
    }
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if i == 6 && !stretch {
            println!("criterion 7 [{name}]: SKIPPED (pass --include-ignored or set LINPRES_STRETCH=1)");
            continue;
        }
        let t = Instant::now();
        match run() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({:.2?}) {detail}", i + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({:.2?}) {why}", i + 1, t.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
