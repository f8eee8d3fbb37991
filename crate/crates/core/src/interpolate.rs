//! Interpolation of invariants from samples of a variety.
//!
//! Candidates are weight-zero forms, optionally projected onto the isotypic
//! piece of a finite symmetry group: permutations of the indices inside each
//! factor (the Weyl group of `Π SL(V_i)`) and permutations of interchangeable
//! factors. Each candidate is evaluated on sampled points; the kernel of the
//! evaluation matrix holds the coefficients of the invariant.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equations::{apply_factor_action, random_ambient_point, transvection, SecantSampler, DEFAULT_SAMPLE_BOUND};
use crate::error::{Error, Result};
use crate::linalg::{bigint_mod, rational_reconstruction, ModEchelon, PrimeSet};
use crate::poly::{rat, Poly, Rational};
use crate::tensor::{for_each_weight_zero, is_weight_zero, Monomial, TensorFormat};

pub const DEFAULT_CANDIDATE_CAP: usize = 200_000;
pub const DEFAULT_ROW_CAP: usize = 10_000;
pub const DEFAULT_MARGIN: usize = 10;

/// Action of index permutations inside each factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylMode {
    #[default]
    Off,
    /// Plain orbit sums.
    Plain,
    /// Orbit sums twisted by the sign that makes permutation matrices unimodular.
    Signed,
}

/// Action of permutations of interchangeable factors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    #[default]
    Off,
    Symmetric,
    /// `Σ sgn(τ)·τ`.
    Skew,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisOptions {
    pub weyl: WeylMode,
    pub factor: FactorMode,
    pub candidate_cap: usize,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions {
            weyl: WeylMode::Off,
            factor: FactorMode::Off,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

impl BasisOptions {
    pub fn construction(&self) -> &'static str {
        match (self.weyl != WeylMode::Off, self.factor) {
            (false, FactorMode::Off) => "raw",
            (true, FactorMode::Off) => "weyl_symmetrized",
            (false, FactorMode::Skew) => "factor_skew",
            (false, FactorMode::Symmetric) => "factor_symmetric",
            (true, FactorMode::Skew) => "both",
            (true, FactorMode::Symmetric) => "weyl_factor_symmetric",
        }
    }
}

/// Linearly independent weight-zero candidates of one degree.
#[derive(Clone, Debug)]
pub struct CandidateBasis {
    pub degree: usize,
    pub elements: Vec<Poly>,
    pub options: BasisOptions,
    pub weight_zero_count: usize,
    pub group_order: usize,
}

impl CandidateBasis {
    pub fn construction(&self) -> &'static str {
        self.options.construction()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A symmetry acting on coordinates, with its character value.
struct GroupElement {
    perm: Vec<u32>,
    sign: i64,
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if cur.len() == n {
            let inv = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| cur[i] > cur[j]).count();
            out.push((cur.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for x in 0..n {
            if !cur.contains(&x) {
                cur.push(x);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    go(n, &mut cur, &mut out);
    out
}

fn symmetry_group(format: &TensorFormat, delta: usize, options: &BasisOptions) -> Vec<GroupElement> {
    let k = format.num_factors();
    let n_amb = format.ambient_dimension();
    // per factor: (local index map, character) for each index permutation
    let per_factor: Vec<Vec<(Vec<usize>, i64)>> = (0..k)
        .map(|i| {
            let n = format.dims()[i];
            let perms = if options.weyl == WeylMode::Off {
                vec![((0..n).collect(), 1)]
            } else {
                permutations(n)
            };
            perms
                .into_iter()
                .map(|(sigma, sgn)| {
                    let map = (0..format.factor_size(i))
                        .map(|l| {
                            let mut exps = vec![0u32; n];
                            for &a in format.factor_multiset(i, l) {
                                exps[sigma[a as usize]] += 1;
                            }
                            format.factor_index_of_exponents(i, &exps).expect("valid multiset")
                        })
                        .collect();
                    let power = delta * format.degrees()[i] / n;
                    let chi = if options.weyl == WeylMode::Signed && power % 2 == 1 { sgn } else { 1 };
                    (map, chi)
                })
                .collect()
        })
        .collect();
    // factor permutations: product over interchangeable groups
    let mut factor_perms: Vec<(Vec<usize>, i64)> = vec![((0..k).collect(), 1)];
    if options.factor != FactorMode::Off {
        for group in format.interchangeable_factors().into_iter().filter(|g| g.len() > 1) {
            let mut next = Vec::new();
            for (base, s) in &factor_perms {
                for (tau, sgn) in permutations(group.len()) {
                    let mut p = base.clone();
                    for (a, &pos) in group.iter().enumerate() {
                        p[pos] = group[tau[a]];
                    }
                    let chi = if options.factor == FactorMode::Skew { sgn } else { 1 };
                    next.push((p, s * chi));
                }
            }
            factor_perms = next;
        }
    }
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * format.factor_size(i + 1);
    }
    let locals: Vec<Vec<usize>> = (0..n_amb).map(|c| format.split_index(c)).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    loop {
        let weyl_sign: i64 = (0..k).map(|i| per_factor[i][choice[i]].1).product();
        for (tau, s) in &factor_perms {
            let perm = locals
                .iter()
                .map(|ls| {
                    (0..k)
                        .map(|i| strides[tau[i]] * per_factor[i][choice[i]].0[ls[i]])
                        .sum::<usize>() as u32
                })
                .collect();
            out.push(GroupElement { perm, sign: weyl_sign * s });
        }
        let mut i = 0;
        while i < k && choice[i] + 1 == per_factor[i].len() {
            choice[i] = 0;
            i += 1;
        }
        if i == k {
            return out;
        }
        choice[i] += 1;
    }
}

/// Weight-zero candidates of degree `delta`, optionally symmetrized.
pub fn build_candidate_basis(format: &TensorFormat, delta: usize, options: &BasisOptions) -> Result<CandidateBasis> {
    let mut monos = Vec::new();
    let mut count = 0usize;
    for_each_weight_zero(format, delta, |m| {
        count += 1;
        if count <= options.candidate_cap {
            monos.push(m.clone());
        }
    });
    if count > options.candidate_cap {
        return Err(Error::CapExceeded {
            what: "weight-zero candidates",
            required: count as u128,
            cap: options.candidate_cap as u128,
            report: format!(
                "degree {delta} on {format}: {count} weight-zero monomials exceed the candidate cap {}; \
                 enable index/factor symmetrization or raise the cap",
                options.candidate_cap
            ),
        });
    }
    if monos.is_empty() {
        return Err(Error::EmptyCandidates(format!("no weight-zero monomials of degree {delta} on {format}")));
    }
    let group = symmetry_group(format, delta, options);
    let elements = if group.len() == 1 {
        monos.into_iter().map(|m| Poly::monomial(m, Rational::one())).collect()
    } else {
        orbit_sums(&monos, &group, delta)
    };
    if elements.is_empty() {
        return Err(Error::EmptyCandidates(format!(
            "every {} candidate of degree {delta} cancels",
            options.construction()
        )));
    }
    Ok(CandidateBasis {
        degree: delta,
        elements,
        options: *options,
        weight_zero_count: count,
        group_order: group.len(),
    })
}

/// `Σ_g χ(g)·g(M) / |Stab(M)|` for one representative of each orbit;
/// vanishing sums are dropped. Distinct orbits have disjoint supports.
fn orbit_sums(monos: &[Monomial], group: &[GroupElement], delta: usize) -> Vec<Poly> {
    let mut seen: HashSet<Monomial> = HashSet::with_capacity(monos.len());
    let mut out = Vec::new();
    for m in monos {
        if seen.contains(m) {
            continue;
        }
        let mut acc: BTreeMap<Monomial, i64> = BTreeMap::new();
        for g in group {
            let image = m.map_vars(|v| g.perm[v as usize]);
            *acc.entry(image).or_default() += g.sign;
        }
        let stab = (group.len() / acc.len()) as i64;
        let mut terms = Vec::new();
        for (image, c) in acc {
            seen.insert(image.clone());
            if c != 0 {
                terms.push((image, rat(c / stab)));
            }
        }
        if !terms.is_empty() {
            out.push(Poly::from_terms(delta, terms).expect("homogeneous"));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationSummary {
    pub vanishing_trials: usize,
    pub vanishing_passed: usize,
    pub nonvanishing_trials: usize,
    pub nonvanishing_passed: usize,
    /// Random ambient points where the invariant happened to vanish; each was resampled.
    pub nonvanishing_resampled: usize,
    pub sl_trials: usize,
    pub sl_passed: usize,
    pub weight_zero: bool,
    pub seed: u64,
}

impl VerificationSummary {
    pub fn all_passed(&self) -> bool {
        self.weight_zero
            && self.vanishing_passed == self.vanishing_trials
            && self.nonvanishing_passed == self.nonvanishing_trials
            && self.sl_passed == self.sl_trials
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyTrials {
    pub vanishing: usize,
    pub nonvanishing: usize,
    pub sl: usize,
}

impl Default for VerifyTrials {
    fn default() -> Self {
        VerifyTrials {
            vanishing: 100,
            nonvanishing: 10,
            sl: 20,
        }
    }
}

/// Exact checks of an interpolated invariant of `σ_r`: vanishing on fresh
/// samples, nonvanishing on random points, invariance under elementary
/// unimodular changes of basis in single factors.
pub fn verify_invariant(f: &Poly, format: &TensorFormat, r: usize, seed: u64, trials: VerifyTrials) -> Result<VerificationSummary> {
    if f.is_zero() {
        return Err(Error::InvalidFormat("cannot verify the zero polynomial".into()));
    }
    let mut sampler = SecantSampler::new(format, r, seed, DEFAULT_SAMPLE_BOUND);
    let vanishing_passed = (0..trials.vanishing)
        .map(|_| sampler.next_point())
        .collect::<Vec<_>>()
        .par_iter()
        .filter(|p| f.evaluate(p).is_zero())
        .count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5_5a5a);
    let mut nonvanishing_passed = 0;
    let mut nonvanishing_resampled = 0;
    for _ in 0..trials.nonvanishing {
        // a zero hit is resampled a bounded number of times
        let mut ok = false;
        for _ in 0..5 {
            if !f.evaluate(&random_ambient_point(format, &mut rng, DEFAULT_SAMPLE_BOUND)).is_zero() {
                ok = true;
                break;
            }
            nonvanishing_resampled += 1;
        }
        nonvanishing_passed += usize::from(ok);
    }

    let mut sl_passed = 0;
    for _ in 0..trials.sl {
        let p = random_ambient_point(format, &mut rng, DEFAULT_SAMPLE_BOUND);
        let i = rng.gen_range(0..format.num_factors());
        let n = format.dims()[i];
        let g = if n < 2 {
            transvection(1, 0, 0, rat(0))
        } else {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let mut lambda = 0;
            while lambda == 0 {
                lambda = rng.gen_range(-3..=3);
            }
            transvection(n, a, b, rat(lambda))
        };
        let moved = apply_factor_action(&p, format, i, &g)?;
        if f.evaluate(&moved) == f.evaluate(&p) {
            sl_passed += 1;
        }
    }
    Ok(VerificationSummary {
        vanishing_trials: trials.vanishing,
        vanishing_passed,
        nonvanishing_trials: trials.nonvanishing,
        nonvanishing_passed,
        nonvanishing_resampled,
        sl_trials: trials.sl,
        sl_passed,
        weight_zero: f.terms().all(|(m, _)| is_weight_zero(m, format)),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterpolationConfig {
    pub r: usize,
    pub degree: usize,
    pub seed: u64,
    pub options: BasisOptions,
    pub margin: usize,
    pub row_cap: usize,
    pub trials: VerifyTrials,
}

impl InterpolationConfig {
    pub fn new(r: usize, degree: usize, seed: u64) -> Self {
        InterpolationConfig {
            r,
            degree,
            seed,
            options: BasisOptions::default(),
            margin: DEFAULT_MARGIN,
            row_cap: DEFAULT_ROW_CAP,
            trials: VerifyTrials::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterpolationResult {
    #[serde(skip)]
    pub invariant: Poly,
    pub format: TensorFormat,
    pub degree: usize,
    pub r: usize,
    pub construction: &'static str,
    pub weight_zero_count: usize,
    pub candidates: usize,
    pub kernel_dim: usize,
    pub samples: usize,
    pub resampled_rows: usize,
    pub primes: Vec<u64>,
    pub seed: u64,
    pub terms: usize,
    pub verification: VerificationSummary,
}

/// Interpolates the unique invariant of degree `cfg.degree` in the candidate
/// space that vanishes on `σ_r`, then verifies it.
pub fn interpolate_invariant(format: &TensorFormat, cfg: &InterpolationConfig, primes: &PrimeSet) -> Result<InterpolationResult> {
    let basis = build_candidate_basis(format, cfg.degree, &cfg.options)?;
    let c = basis.len();
    let rows = c + cfg.margin;
    if rows > cfg.row_cap {
        return Err(Error::CapExceeded {
            what: "evaluation rows",
            required: rows as u128,
            cap: cfg.row_cap as u128,
            report: format!(
                "degree {} on {format} with {} candidates: {} weight-zero monomials, {c} candidates \
                 (group order {}), {rows} evaluation rows of width {c} needed, row cap {}",
                cfg.degree,
                basis.construction(),
                basis.weight_zero_count,
                basis.group_order,
                cfg.row_cap
            ),
        });
    }

    // sample points, skipping points where every candidate vanishes
    let mut sampler = SecantSampler::new(format, cfg.r, cfg.seed, DEFAULT_SAMPLE_BOUND);
    let mut points: Vec<Vec<BigInt>> = Vec::with_capacity(rows);
    let mut resampled_rows = 0;
    let probe = primes.primes()[0];
    while points.len() < rows {
        let p = sampler.next_integral();
        let vanishes = evaluation_row(&basis.elements, &p, probe).iter().all(|&x| x == 0) && {
            let q: Vec<Rational> = p.iter().cloned().map(Rational::from_integer).collect();
            basis.elements.iter().all(|f| f.evaluate(&q).is_zero())
        };
        if vanishes {
            resampled_rows += 1;
            if resampled_rows > 10 * rows + 100 {
                return Err(Error::NoInvariant {
                    degree: cfg.degree,
                    candidates: c,
                    samples: points.len(),
                });
            }
            continue;
        }
        points.push(p);
    }

    let mut set = primes.clone();
    let mut per_prime: Vec<(u64, ModEchelon)> = Vec::new();
    let mut pending: Vec<u64> = set.primes().to_vec();
    for _round in 0..12 {
        for p in pending.drain(..) {
            let mut e = ModEchelon::new(c, p);
            let evals: Vec<Vec<u64>> = points.par_iter().map(|pt| evaluation_row(&basis.elements, pt, p)).collect();
            for row in evals {
                if e.is_full() {
                    break;
                }
                e.insert(row);
            }
            per_prime.push((p, e));
        }
        let best = per_prime.iter().map(|(_, e)| e.rank()).max().unwrap_or(0);
        // among maximal-rank primes, keep the largest group sharing one pivot pattern
        let mut patterns: BTreeMap<Vec<usize>, Vec<&(u64, ModEchelon)>> = BTreeMap::new();
        for entry in per_prime.iter().filter(|(_, e)| e.rank() == best) {
            patterns.entry(entry.1.pivot_columns()).or_default().push(entry);
        }
        let agreeing = patterns.into_values().max_by_key(|g| g.len()).unwrap_or_default();
        let kernel_dim = c - best;
        if kernel_dim == 0 {
            return Err(Error::NoInvariant {
                degree: cfg.degree,
                candidates: c,
                samples: rows,
            });
        }
        if kernel_dim > 1 {
            return Err(Error::AmbiguousKernel {
                kernel_dim,
                candidates: c,
                samples: rows,
            });
        }
        if agreeing.len() < set.min_agree.max(2) {
            pending.push(set.push_fresh());
            continue;
        }
        let residues: Vec<Vec<u64>> = agreeing.iter().map(|(_, e)| e.kernel().remove(0)).collect();
        let ps: Vec<u64> = agreeing.iter().map(|(p, _)| *p).collect();
        let coeffs = match rational_reconstruction(&residues, &ps) {
            Ok(v) => v,
            Err(Error::Reconstruction(_)) => {
                pending.push(set.push_fresh());
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut f = Poly::zero(cfg.degree);
        for (x, cand) in coeffs.iter().zip(&basis.elements) {
            if !x.is_zero() {
                f.add_scaled(cand, x);
            }
        }
        let f = f.primitive();
        // every sample must vanish exactly, otherwise the lift is wrong
        let exact_ok = points.par_iter().all(|p| {
            let q: Vec<Rational> = p.iter().cloned().map(Rational::from_integer).collect();
            f.evaluate(&q).is_zero()
        });
        if !exact_ok {
            pending.push(set.push_fresh());
            continue;
        }
        let verification = verify_invariant(&f, format, cfg.r, cfg.seed.wrapping_add(0x9e37_79b9), cfg.trials)?;
        if !verification.all_passed() {
            return Err(Error::Verification(format!(
                "interpolated invariant failed verification: {}/{} vanishing, {}/{} nonvanishing, {}/{} invariance, weight zero {}",
                verification.vanishing_passed,
                verification.vanishing_trials,
                verification.nonvanishing_passed,
                verification.nonvanishing_trials,
                verification.sl_passed,
                verification.sl_trials,
                verification.weight_zero
            )));
        }
        return Ok(InterpolationResult {
            terms: f.len(),
            invariant: f,
            format: format.clone(),
            degree: cfg.degree,
            r: cfg.r,
            construction: basis.construction(),
            weight_zero_count: basis.weight_zero_count,
            candidates: c,
            kernel_dim,
            samples: rows,
            resampled_rows,
            primes: ps,
            seed: cfg.seed,
            verification,
        });
    }
    Err(Error::Reconstruction("the kernel vector could not be lifted".into()))
}

fn evaluation_row(elements: &[Poly], point: &[BigInt], p: u64) -> Vec<u64> {
    let reduced: Vec<u64> = point.iter().map(|x| bigint_mod(x, p)).collect();
    elements
        .iter()
        .map(|f| f.evaluate_mod(&reduced, p).expect("integral candidates"))
        .collect()
}
