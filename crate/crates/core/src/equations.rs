//! Flattenings and their minors, degree components of secant ideals,
//! prolongations, point samplers and rank-based membership tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::{all_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::linalg::{nullspace_exact, rank_exact, SparseMatrix};
use crate::poly::{echelonize_graded, rat, LinearSubspace, Poly, Rational};
use crate::tensor::{enumerate_monomials, exponent_vector, flat_weight, multinomial, multisets_of, Monomial, TensorFormat};

/// Symbolic flattening matrix with degree-one entries.
#[derive(Clone, Debug)]
pub struct FlatteningMatrix {
    /// Per-factor degree taken by the rows.
    pub row_degrees: Vec<usize>,
    /// Per-factor index multisets labelling each row.
    pub row_labels: Vec<Vec<Vec<u32>>>,
    pub col_labels: Vec<Vec<Vec<u32>>>,
    entries: Vec<Vec<Poly>>,
}

impl FlatteningMatrix {
    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn entry(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r][c]
    }

    /// Numeric matrix at a point.
    pub fn evaluate(&self, point: &[Rational]) -> SparseMatrix {
        let mut m = SparseMatrix::new(self.rows(), self.cols());
        for (r, row) in self.entries.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                m.set(r, c, e.evaluate(point));
            }
        }
        m
    }
}

/// Flattening with factor `i` contributing `row_degrees[i]` of its `d_i`
/// indices to the rows. Entry `(β, γ)` is `t_{β+γ} · Π (β_i+γ_i)!/γ_i!`,
/// the coefficient of `x^γ` in `∂^β` of the tensor's polynomial.
pub fn flattening(format: &TensorFormat, row_degrees: &[usize]) -> Result<FlatteningMatrix> {
    let k = format.num_factors();
    if row_degrees.len() != k {
        return Err(Error::InvalidSplit(format!("{} row degrees for {k} factors", row_degrees.len())));
    }
    let degrees = format.degrees();
    if let Some(i) = (0..k).find(|&i| row_degrees[i] > degrees[i]) {
        return Err(Error::InvalidSplit(format!(
            "factor {} has degree {} but the rows take {}",
            i + 1,
            degrees[i],
            row_degrees[i]
        )));
    }
    if row_degrees.iter().all(|&a| a == 0) || (0..k).all(|i| row_degrees[i] == degrees[i]) {
        return Err(Error::InvalidSplit("one side of the flattening is trivial".into()));
    }
    let side = |take: &dyn Fn(usize) -> usize| -> Vec<Vec<Vec<u32>>> {
        let per: Vec<Vec<Vec<u32>>> = (0..k).map(|i| multisets_of(format.dims()[i] as u32, take(i))).collect();
        cartesian(&per)
    };
    let row_labels = side(&|i| row_degrees[i]);
    let col_labels = side(&|i| degrees[i] - row_degrees[i]);
    let entries = row_labels
        .iter()
        .map(|row| {
            col_labels
                .iter()
                .map(|col| {
                    let mut locals = Vec::with_capacity(k);
                    let mut mult = BigInt::one();
                    for i in 0..k {
                        let n = format.dims()[i];
                        let beta = exponent_vector(&row[i], n);
                        let gamma = exponent_vector(&col[i], n);
                        let merged: Vec<u32> = beta.iter().zip(&gamma).map(|(b, g)| b + g).collect();
                        for (&b, &g) in beta.iter().zip(&gamma) {
                            for x in g + 1..=g + b {
                                mult *= x;
                            }
                        }
                        locals.push(format.factor_index_of_exponents(i, &merged).expect("valid multiset"));
                    }
                    Poly::monomial(Monomial::var(format.join_index(&locals)), Rational::from_integer(mult))
                })
                .collect()
        })
        .collect();
    Ok(FlatteningMatrix {
        row_degrees: row_degrees.to_vec(),
        row_labels,
        col_labels,
        entries,
    })
}

/// Flattening `T_I` of a bipartition: factors in `I` go entirely to the rows.
pub fn bipartition_flattening(format: &TensorFormat, bp: &Bipartition) -> Result<FlatteningMatrix> {
    if bp.k() != format.num_factors() {
        return Err(Error::InvalidSplit(format!(
            "bipartition of [{}] for {} factors",
            bp.k(),
            format.num_factors()
        )));
    }
    let rows: Vec<usize> = (0..bp.k()).map(|i| if bp.contains(i) { format.degrees()[i] } else { 0 }).collect();
    flattening(format, &rows)
}

fn cartesian(per: &[Vec<Vec<u32>>]) -> Vec<Vec<Vec<u32>>> {
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for options in per {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Nontrivial row-degree splits, one of each complementary pair.
pub fn all_splits(format: &TensorFormat) -> Vec<Vec<usize>> {
    let degrees = format.degrees();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cur = vec![0usize; degrees.len()];
    loop {
        let trivial = cur.iter().all(|&a| a == 0) || cur == degrees;
        let complement: Vec<usize> = degrees.iter().zip(&cur).map(|(d, a)| d - a).collect();
        if !trivial && !seen.contains(&complement) {
            seen.insert(cur.clone());
            out.push(cur.clone());
        }
        let mut i = 0;
        while i < cur.len() && cur[i] == degrees[i] {
            cur[i] = 0;
            i += 1;
        }
        if i == cur.len() {
            return out;
        }
        cur[i] += 1;
    }
}

/// All `s × s` minors, expanded. Empty if `s` exceeds either side.
pub fn minors(m: &FlatteningMatrix, s: usize) -> Vec<Poly> {
    if s == 0 || s > m.rows() || s > m.cols() {
        return Vec::new();
    }
    let row_sets = subsets(m.rows(), s);
    let col_sets = subsets(m.cols(), s);
    let perms = signed_permutations(s);
    row_sets
        .par_iter()
        .flat_map_iter(|rows| {
            col_sets.iter().map(|cols| {
                let mut det = Poly::zero(s);
                for (perm, sign) in &perms {
                    let mut term = Poly::constant(rat(*sign));
                    for (i, &j) in perm.iter().enumerate() {
                        term = term.mul(m.entry(rows[i], cols[j]));
                    }
                    det.add_scaled(&term, &Rational::one());
                }
                det
            })
        })
        .filter(|d| !d.is_zero())
        .collect()
}

fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..s).collect();
    loop {
        out.push(cur.clone());
        let mut i = s;
        while i > 0 && cur[i - 1] == n - s + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..s {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn signed_permutations(s: usize) -> Vec<(Vec<usize>, i64)> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i64)>) {
        let s = used.len();
        if prefix.len() == s {
            let inversions = (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).filter(|&(i, j)| prefix[i] > prefix[j]).count();
            out.push((prefix.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for j in 0..s {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                go(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; s], &mut out);
    out
}

/// Span of the 2×2 minors of every flattening (every degree split).
pub fn segre_degree2_component(format: &TensorFormat) -> Result<LinearSubspace> {
    let mut polys = Vec::new();
    for split in all_splits(format) {
        polys.extend(minors(&flattening(format, &split)?, 2));
    }
    echelonize_graded(&polys, 2, format)
}

/// Span of the `(r+1) × (r+1)` minors of all bipartition flattenings.
pub fn secant_degree_component(format: &TensorFormat, r: usize) -> Result<LinearSubspace> {
    if !format.is_multilinear() {
        return Err(Error::Unsupported(
            "secant components from minors need all degrees equal to one".into(),
        ));
    }
    if r == 0 {
        return Err(Error::InvalidFormat("secant rank must be at least one".into()));
    }
    if format.num_factors() < 2 {
        return Ok(LinearSubspace::empty(r + 1));
    }
    let mut polys = Vec::new();
    for bp in all_bipartitions(format.num_factors())? {
        polys.extend(minors(&bipartition_flattening(format, &bp)?, r + 1));
    }
    echelonize_graded(&polys, r + 1, format)
}

/// Comparison of the minors with the prolongation of the degree-2 component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub minors_dim: usize,
    pub prolongation_dim: usize,
    pub contained: bool,
    pub equal: bool,
}

/// Checks `minors ⊆ I_2^{(r−1)}`; for `r = 2` the two should coincide.
pub fn cross_check_secant(format: &TensorFormat, r: usize, component: &LinearSubspace, cap: u128) -> Result<CrossCheck> {
    if r < 2 {
        return Err(Error::InvalidFormat("the cross-check needs r ≥ 2".into()));
    }
    let prolonged = prolongation(&segre_degree2_component(format)?, r - 1, format, cap)?;
    let contained = component.is_subspace_of(&prolonged)?;
    Ok(CrossCheck {
        minors_dim: component.dim(),
        prolongation_dim: prolonged.dim(),
        contained,
        equal: contained && component.dim() == prolonged.dim(),
    })
}

/// `A^{(p)} = {f : ∂^Δ f ∈ A for every order-p Δ}`, solved weight space by
/// weight space when the basis of `A` is weight-homogeneous.
pub fn prolongation(a: &LinearSubspace, p: usize, format: &TensorFormat, cap: u128) -> Result<LinearSubspace> {
    if p == 0 {
        return Ok(a.clone());
    }
    let d = a.degree();
    let graded = a.basis().all(|f| f.is_weight_homogeneous(format));
    let monos = enumerate_monomials(format, d + p, cap)?;
    let mut groups: BTreeMap<Vec<u32>, Vec<Monomial>> = BTreeMap::new();
    for m in monos {
        let key = if graded { flat_weight(&m, format) } else { Vec::new() };
        groups.entry(key).or_default().push(m);
    }
    let pieces: Vec<Vec<Poly>> = groups
        .into_par_iter()
        .map(|(_, cols)| prolong_block(a, p, &cols))
        .collect();
    let polys: Vec<Poly> = pieces.into_iter().flatten().collect();
    echelonize_graded(&polys, d + p, format)
}

fn prolong_block(a: &LinearSubspace, p: usize, cols: &[Monomial]) -> Vec<Poly> {
    let degree = cols[0].degree();
    // rows keyed by (Δ, residual monomial)
    let mut rows: HashMap<(Monomial, Monomial), Vec<(usize, Rational)>> = HashMap::new();
    for (j, mu) in cols.iter().enumerate() {
        for (delta, mult) in sub_multisets(mu, p) {
            let rest = mu.divide(&delta).expect("sub-multiset divides");
            let nf = normal_form(a, &rest);
            for (m, c) in nf.terms() {
                rows.entry((delta.clone(), m.clone()))
                    .or_default()
                    .push((j, c * rat(mult as i64)));
            }
        }
    }
    let matrix = SparseMatrix::from_rows(cols.len(), rows.into_values().collect());
    nullspace_exact(&matrix)
        .into_iter()
        .map(|v| Poly::from_terms(degree, v.entries.into_iter().map(|(j, c)| (cols[j].clone(), c))).expect("degree"))
        .collect()
}

/// `m` reduced modulo the pivots of `a`.
pub(crate) fn normal_form(a: &LinearSubspace, m: &Monomial) -> Poly {
    match a.row_for_pivot(m) {
        Some(row) => Poly::monomial(m.clone(), Rational::one()).sub(row),
        None => Poly::monomial(m.clone(), Rational::one()),
    }
}

/// Distinct sub-multisets `Δ ⊆ μ` of size `p`, with `∂^Δ μ = mult · μ/Δ`.
fn sub_multisets(mu: &Monomial, p: usize) -> Vec<(Monomial, u64)> {
    let exps: Vec<(usize, u32)> = mu.exponents().collect();
    let mut out = Vec::new();
    fn go(i: usize, left: usize, exps: &[(usize, u32)], cur: &mut Vec<(usize, u32)>, mult: u64, out: &mut Vec<(Monomial, u64)>) {
        if left == 0 {
            out.push((Monomial::from_exponents(cur.iter().copied()), mult));
            return;
        }
        if i == exps.len() {
            return;
        }
        let (v, e) = exps[i];
        for take in (0..=e.min(left as u32)).rev() {
            let falling: u64 = (0..take).map(|t| (e - t) as u64).product();
            if take > 0 {
                cur.push((v, take));
            }
            go(i + 1, left - take as usize, exps, cur, mult * falling, out);
            if take > 0 {
                cur.pop();
            }
        }
    }
    go(0, p, &exps, &mut Vec::new(), 1, &mut out);
    out
}

/// Deterministic sampler of points `Σ_{s=1}^r v_1^{d_1} ⊗ ⋯ ⊗ v_k^{d_k}`.
#[derive(Clone, Debug)]
pub struct SecantSampler {
    format: TensorFormat,
    r: usize,
    bound: i64,
    rng: ChaCha8Rng,
}

pub const DEFAULT_SAMPLE_BOUND: i64 = 10;

impl SecantSampler {
    pub fn new(format: &TensorFormat, r: usize, seed: u64, bound: i64) -> Self {
        SecantSampler {
            format: format.clone(),
            r,
            bound: bound.max(1),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn format(&self) -> &TensorFormat {
        &self.format
    }

    fn random_vector(&mut self, n: usize) -> Vec<i64> {
        loop {
            let v: Vec<i64> = (0..n).map(|_| self.rng.gen_range(-self.bound..=self.bound)).collect();
            if v.iter().any(|&x| x != 0) {
                return v;
            }
        }
    }

    /// Next point as integers.
    pub fn next_integral(&mut self) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.format.ambient_dimension()];
        for _ in 0..self.r {
            let vectors: Vec<Vec<i64>> = self
                .format
                .dims()
                .to_vec()
                .into_iter()
                .map(|n| self.random_vector(n))
                .collect();
            for (x, y) in acc.iter_mut().zip(rank_one_point(&self.format, &vectors)) {
                *x += y;
            }
        }
        acc
    }

    pub fn next_point(&mut self) -> Vec<Rational> {
        self.next_integral().into_iter().map(Rational::from_integer).collect()
    }
}

/// Coordinates of `v_1^{d_1} ⊗ ⋯ ⊗ v_k^{d_k}`: `c_α = Π multinomial(α_i) v_i^{α_i}`.
pub fn rank_one_point(format: &TensorFormat, vectors: &[Vec<i64>]) -> Vec<BigInt> {
    let tables: Vec<Vec<BigInt>> = (0..format.num_factors())
        .map(|i| {
            (0..format.factor_size(i))
                .map(|local| {
                    let ms = format.factor_multiset(i, local);
                    let exps = exponent_vector(ms, format.dims()[i]);
                    let mut x = BigInt::from(multinomial(&exps));
                    for &a in ms {
                        x *= vectors[i][a as usize];
                    }
                    x
                })
                .collect()
        })
        .collect();
    (0..format.ambient_dimension())
        .map(|c| {
            format
                .split_index(c)
                .iter()
                .enumerate()
                .fold(BigInt::one(), |acc, (i, &l)| acc * &tables[i][l])
        })
        .collect()
}

pub fn sample_secant_point(format: &TensorFormat, r: usize, seed: u64, bound: i64) -> Vec<Rational> {
    SecantSampler::new(format, r, seed, bound).next_point()
}

/// Uniform integer point of the ambient space with entries in `[−bound, bound]`.
pub fn random_ambient_point(format: &TensorFormat, rng: &mut impl Rng, bound: i64) -> Vec<Rational> {
    (0..format.ambient_dimension())
        .map(|_| rat(rng.gen_range(-bound..=bound)))
        .collect()
}

fn check_point(point: &[Rational], format: &TensorFormat) -> Result<()> {
    if point.len() != format.ambient_dimension() {
        return Err(Error::DimensionMismatch {
            expected: format.ambient_dimension(),
            found: point.len(),
        });
    }
    Ok(())
}

/// Ranks of the `k` flattenings taking one index of factor `i` to the rows.
pub fn multilinear_rank(point: &[Rational], format: &TensorFormat) -> Result<Vec<usize>> {
    check_point(point, format)?;
    let k = format.num_factors();
    if k == 1 && format.degrees()[0] == 1 {
        return Ok(vec![usize::from(point.iter().any(|x| !x.is_zero()))]);
    }
    (0..k)
        .map(|i| {
            let rows: Vec<usize> = (0..k).map(|j| usize::from(j == i)).collect();
            Ok(rank_exact(&flattening(format, &rows)?.evaluate(point)))
        })
        .collect()
}

/// True iff some flattening of `collection` has rank exactly one at `point`.
pub fn partition_rank_one_test(point: &[Rational], format: &TensorFormat, collection: &[Bipartition]) -> Result<bool> {
    check_point(point, format)?;
    if !format.is_multilinear() {
        return Err(Error::Unsupported("partition rank needs all degrees equal to one".into()));
    }
    if point.iter().all(Zero::is_zero) {
        return Err(Error::ZeroPoint);
    }
    for bp in collection {
        if rank_exact(&bipartition_flattening(format, bp)?.evaluate(point)) == 1 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Matrix (over local indices of factor `i`) of the substitution
/// `x_a ↦ Σ_b g[b][a] x_b` on degree-`d_i` forms: column `l` holds the image
/// of the `l`-th monomial. On rank-one points this sends `v ↦ g v`.
pub fn factor_action_matrix(format: &TensorFormat, i: usize, g: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = format.dims()[i];
    let size = format.factor_size(i);
    let mut m = vec![vec![Rational::zero(); size]; size];
    for (l, col) in (0..size).map(|l| (l, format.factor_multiset(i, l))) {
        // expand Π_a (Σ_b g[b][a] x_b) over the multiset
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::from([(vec![0u32; n], Rational::one())]);
        for &a in col {
            let mut next: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
            for (exps, c) in &acc {
                for (b, row) in g.iter().enumerate() {
                    let coeff = &row[a as usize];
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut e = exps.clone();
                    e[b] += 1;
                    *next.entry(e).or_insert_with(Rational::zero) += c * coeff;
                }
            }
            acc = next;
        }
        for (exps, c) in acc {
            let target = format.factor_index_of_exponents(i, &exps).expect("valid multiset");
            m[target][l] += c;
        }
    }
    m
}

/// Applies `g ∈ GL(V_i)` to the tensor `point` along factor `i`.
pub fn apply_factor_action(point: &[Rational], format: &TensorFormat, i: usize, g: &[Vec<Rational>]) -> Result<Vec<Rational>> {
    check_point(point, format)?;
    let n = format.dims()[i];
    if g.len() != n || g.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.len(),
        });
    }
    let m = factor_action_matrix(format, i, g);
    let mut out = vec![Rational::zero(); point.len()];
    for (c, x) in point.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let mut locals = format.split_index(c);
        let l = locals[i];
        for (target, row) in m.iter().enumerate() {
            if !row[l].is_zero() {
                locals[i] = target;
                out[format.join_index(&locals)] += x * &row[l];
            }
        }
    }
    Ok(out)
}

/// Elementary matrix `I + λ E_ab` of size `n`.
pub fn transvection(n: usize, a: usize, b: usize, lambda: Rational) -> Vec<Vec<Rational>> {
    let mut g: Vec<Vec<Rational>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    g[a][b] += lambda;
    g
}
