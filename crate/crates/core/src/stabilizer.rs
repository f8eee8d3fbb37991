//! Lie algebra of matrices preserving a degree-`d` ideal component, and the
//! preserver verdict built on it.
//!
//! The unknown matrix `A = (a_uv)` acts by `A·f = Σ a_uv x_u ∂_v f`. For every
//! basis element `f_j` the residual of `A·f_j` modulo the pivots of the
//! component is linear in the `a_uv`; each residual coefficient is one
//! equation. When the component is spanned by weight vectors, `a_uv` only
//! meets equations of weight `wt(f_j) + wt(u) − wt(v)`, so the unknowns split
//! into independent blocks indexed by `wt(u) − wt(v)`.
//!
//! Equations are reduced modulo several primes and streamed into per-block
//! echelon forms. Kernels are lifted by rational reconstruction and every
//! lifted matrix is then checked exactly. Since a modular rank never exceeds
//! the rational rank, the certified dimension is exact.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::{expected_preserver_dim, set_partitions};
use crate::error::{Error, Result};
use crate::linalg::{rational_mod, rational_reconstruction, ModEchelon, PrimeSet, RowSpan, SparseMatrix};
use crate::poly::{lie_action, LinearSubspace, Poly, Rational};
use crate::tensor::{exponent_vector, Monomial, TensorFormat};

/// Basis of a Lie subalgebra of `gl_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieBasis {
    pub n: usize,
    pub basis: Vec<SparseMatrix>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn span(&self) -> RowSpan {
        let vectors: Vec<_> = self.basis.iter().map(SparseMatrix::to_flat_vector).collect();
        RowSpan::new(self.n * self.n, &vectors)
    }

    pub fn contains(&self, a: &SparseMatrix) -> bool {
        self.span().contains(&a.to_flat_vector())
    }
}

/// True iff `[A, B]` lies in the span for every pair of basis elements.
pub fn bracket_closure_check(lb: &LieBasis) -> bool {
    let span = lb.span();
    let b = &lb.basis;
    (0..b.len())
        .flat_map(|i| (i + 1..b.len()).map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .par_iter()
        .all(|&(i, j)| span.contains(&b[i].commutator(&b[j]).to_flat_vector()))
}

/// Diagnostics of one annihilator computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnnihilatorStats {
    pub unknowns: usize,
    pub blocks: usize,
    pub equations: u64,
    pub primes: Vec<u64>,
    pub certified: bool,
}

/// Lie algebra `{A : A·I_d ⊆ I_d}` with the default prime policy.
pub fn lie_annihilator(ideal: &LinearSubspace, format: &TensorFormat) -> Result<LieBasis> {
    Ok(lie_annihilator_with(ideal, format, &PrimeSet::auto(0))?.0)
}

struct Block {
    pairs: Vec<(u32, u32)>,
}

struct Layout {
    blocks: Vec<Block>,
    // (u, v) ↦ (block, position)
    slot: Vec<(u32, u32)>,
}

fn layout(format: &TensorFormat, graded: bool) -> Layout {
    let n = format.ambient_dimension();
    let mut keys: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut slot = vec![(0u32, 0u32); n * n];
    for u in 0..n {
        for v in 0..n {
            let key: Vec<i64> = if graded {
                format
                    .coord_marginal(u)
                    .iter()
                    .zip(format.coord_marginal(v))
                    .map(|(&a, &b)| a as i64 - b as i64)
                    .collect()
            } else {
                Vec::new()
            };
            let b = *keys.entry(key).or_insert_with(|| {
                blocks.push(Block { pairs: Vec::new() });
                blocks.len() - 1
            });
            slot[u * n + v] = (b as u32, blocks[b].pairs.len() as u32);
            blocks[b].pairs.push((u as u32, v as u32));
        }
    }
    Layout { blocks, slot }
}

/// Basis rows and pivot normal forms reduced modulo each prime.
struct ModularIdeal {
    rows: Vec<Vec<(Monomial, Vec<u64>)>>,
    // pivot ↦ −(row − pivot)
    nf: HashMap<Monomial, Vec<(Monomial, Vec<u64>)>>,
}

fn reduce_coeffs(c: &Rational, primes: &[u64]) -> Option<Vec<u64>> {
    primes.iter().map(|&p| rational_mod(c, p)).collect()
}

fn modular_ideal(ideal: &LinearSubspace, primes: &[u64]) -> Option<ModularIdeal> {
    let mut rows = Vec::with_capacity(ideal.dim());
    let mut nf = HashMap::new();
    for f in ideal.basis() {
        let terms: Vec<(Monomial, Vec<u64>)> = f
            .terms()
            .map(|(m, c)| Some((m.clone(), reduce_coeffs(c, primes)?)))
            .collect::<Option<_>>()?;
        let neg_tail: Vec<(Monomial, Vec<u64>)> = terms[1..]
            .iter()
            .map(|(m, cs)| (m.clone(), cs.iter().zip(primes).map(|(&c, &p)| (p - c) % p).collect()))
            .collect();
        nf.insert(terms[0].0.clone(), neg_tail);
        rows.push(terms);
    }
    Some(ModularIdeal { rows, nf })
}

type BlockKernels = Vec<Vec<Vec<u64>>>;

/// Per prime, per block: pivot columns and canonical kernel basis.
struct PassResult {
    pivots: Vec<Vec<Vec<usize>>>,
    kernels: Vec<BlockKernels>,
    equations: u64,
}

fn modular_pass(ideal: &ModularIdeal, lay: &Layout, n: usize, primes: &[u64]) -> PassResult {
    let mut echelons: Vec<Vec<ModEchelon>> = primes
        .iter()
        .map(|&p| lay.blocks.iter().map(|b| ModEchelon::new(b.pairs.len(), p)).collect())
        .collect();
    let mut equations = 0u64;
    const CHUNK: usize = 64;
    for chunk in ideal.rows.chunks(CHUNK) {
        let live: Vec<bool> = (0..lay.blocks.len()).map(|b| echelons.iter().any(|e| !e[b].is_full())).collect();
        if !live.iter().any(|&x| x) {
            break;
        }
        // rows of this chunk bucketed by block
        let produced: Vec<BlockRows> = chunk
            .par_iter()
            .map(|f| equations_for(f, ideal, lay, n, primes, &live))
            .collect();
        let mut by_block: Vec<Vec<Vec<LocalRow>>> = vec![Vec::new(); lay.blocks.len()];
        for rows in produced {
            for (b, row) in rows {
                equations += 1;
                by_block[b as usize].push(row);
            }
        }
        // per prime, per block insertion in parallel
        let mut jobs: Vec<(usize, &mut ModEchelon)> = Vec::new();
        for per_prime in echelons.iter_mut() {
            for (b, e) in per_prime.iter_mut().enumerate() {
                if !by_block[b].is_empty() && !e.is_full() {
                    jobs.push((b, e));
                }
            }
        }
        jobs.into_par_iter().for_each(|(b, e)| {
            let pi = primes.iter().position(|&p| p == e.prime()).expect("known prime");
            for row in &by_block[b] {
                if e.is_full() {
                    break;
                }
                let entries: Vec<(usize, u64)> = row.iter().map(|(l, cs)| (*l as usize, cs[pi])).collect();
                e.insert_sparse(&entries);
            }
        });
    }
    let pivots = echelons.iter().map(|per| per.iter().map(ModEchelon::pivot_columns).collect()).collect();
    let kernels = echelons.iter().map(|per| per.par_iter().map(ModEchelon::kernel).collect()).collect();
    PassResult {
        pivots,
        kernels,
        equations,
    }
}

/// Entry of a sparse row: unknown index within the block, coefficient mod each prime.
type LocalRow = (u32, Vec<u64>);
/// Sparse rows produced by one form, tagged with their block.
type BlockRows = Vec<(u32, Vec<LocalRow>)>;

/// Equations contributed by one basis element: `(block, sparse row)` pairs.
fn equations_for(
    f: &[(Monomial, Vec<u64>)],
    ideal: &ModularIdeal,
    lay: &Layout,
    n: usize,
    primes: &[u64],
    live: &[bool],
) -> BlockRows {
    let np = primes.len();
    let mut acc: HashMap<(u32, Monomial), HashMap<u32, Vec<u64>>> = HashMap::new();
    let mut add = |b: u32, l: u32, m: &Monomial, coef: &[u64], w: &[u64]| {
        let slot = acc.entry((b, m.clone())).or_default().entry(l).or_insert_with(|| vec![0; np]);
        for i in 0..np {
            let p = primes[i];
            slot[i] = (slot[i] + coef[i] * w[i] % p) % p;
        }
    };
    let ones = vec![1u64; np];
    for (mu, c) in f {
        for (v, e) in mu.exponents() {
            let base = mu.without_var(v).expect("variable divides");
            let coef: Vec<u64> = c.iter().zip(primes).map(|(&x, &p)| x * e as u64 % p).collect();
            for u in 0..n {
                let (b, l) = lay.slot[u * n + v];
                if !live[b as usize] {
                    continue;
                }
                let image = base.times_var(u);
                match ideal.nf.get(&image) {
                    Some(tail) => {
                        for (m, w) in tail {
                            add(b, l, m, &coef, w);
                        }
                    }
                    None => add(b, l, &image, &coef, &ones),
                }
            }
        }
    }
    acc.into_iter()
        .filter_map(|((b, _), row)| {
            let row: Vec<(u32, Vec<u64>)> = row.into_iter().filter(|(_, cs)| cs.iter().any(|&x| x != 0)).collect();
            (!row.is_empty()).then_some((b, row))
        })
        .collect()
}

/// As [`lie_annihilator`], with an explicit prime set; also returns diagnostics.
pub fn lie_annihilator_with(ideal: &LinearSubspace, format: &TensorFormat, primes: &PrimeSet) -> Result<(LieBasis, AnnihilatorStats)> {
    if ideal.is_empty() {
        return Err(Error::InvalidFormat("the ideal component is zero".into()));
    }
    let n = format.ambient_dimension();
    if let Some(&v) = ideal.basis().flat_map(|f| f.terms().flat_map(|(m, _)| m.vars().iter())).max() {
        if v as usize >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v as usize + 1,
            });
        }
    }
    let graded = ideal.basis().all(|f| f.is_weight_homogeneous(format));
    let lay = layout(format, graded);

    let mut set = primes.clone();
    let min_agree = set.min_agree.clamp(1, set.primes().len());
    let mut used: Vec<u64> = Vec::new();
    let mut pivots: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut kernels: Vec<BlockKernels> = Vec::new();
    let mut equations = 0u64;
    let mut pending: Vec<u64> = set.primes().to_vec();
    let mut replacements = 0;

    for _round in 0..12 {
        // replace primes dividing a denominator
        let mut batch = Vec::new();
        for p in pending.drain(..) {
            let mut p = p;
            while modular_ideal(ideal, &[p]).is_none() {
                replacements += 1;
                if replacements > 16 {
                    return Err(Error::PrimeExhaustion("too many primes divide a denominator".into()));
                }
                p = set.replace(p);
            }
            batch.push(p);
        }
        if !batch.is_empty() {
            let mi = modular_ideal(ideal, &batch).expect("checked per prime");
            let pass = modular_pass(&mi, &lay, n, &batch);
            equations = equations.max(pass.equations);
            used.extend(&batch);
            pivots.extend(pass.pivots);
            kernels.extend(pass.kernels);
        }
        match lift_kernels(&lay, n, &used, &pivots, &kernels, min_agree) {
            Ok(candidates) => {
                for a in &candidates {
                    certify(ideal, a)?;
                }
                let stats = AnnihilatorStats {
                    unknowns: n * n,
                    blocks: lay.blocks.len(),
                    equations,
                    primes: used,
                    certified: true,
                };
                return Ok((LieBasis { n, basis: candidates }, stats));
            }
            Err(Error::Reconstruction(_)) => pending.push(set.push_fresh()),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Reconstruction(format!(
        "kernels could not be lifted with {} primes",
        used.len()
    )))
}

/// Lifts per-block kernels from the primes with the largest agreeing rank.
fn lift_kernels(
    lay: &Layout,
    n: usize,
    primes: &[u64],
    pivots: &[Vec<Vec<usize>>],
    kernels: &[BlockKernels],
    min_agree: usize,
) -> Result<Vec<SparseMatrix>> {
    let mut out = Vec::new();
    for (b, block) in lay.blocks.iter().enumerate() {
        let best = (0..primes.len()).map(|i| pivots[i][b].len()).max().unwrap_or(0);
        let chosen: Vec<usize> = (0..primes.len())
            .filter(|&i| pivots[i][b].len() == best)
            .collect();
        let pattern = &pivots[chosen[0]][b];
        let agreeing: Vec<usize> = chosen.into_iter().filter(|&i| &pivots[i][b] == pattern).collect();
        if agreeing.len() < min_agree {
            return Err(Error::Reconstruction(format!("only {} primes agree on block {b}", agreeing.len())));
        }
        let ps: Vec<u64> = agreeing.iter().map(|&i| primes[i]).collect();
        for (k, _) in kernels[agreeing[0]][b].iter().enumerate() {
            let residues: Vec<Vec<u64>> = agreeing.iter().map(|&i| kernels[i][b][k].clone()).collect();
            let v = rational_reconstruction(&residues, &ps)?;
            let mut a = SparseMatrix::new(n, n);
            for (x, &(u, w)) in v.into_iter().zip(&block.pairs) {
                a.set(u as usize, w as usize, x);
            }
            out.push(a);
        }
    }
    Ok(out)
}

fn certify(ideal: &LinearSubspace, a: &SparseMatrix) -> Result<()> {
    for f in ideal.basis() {
        if !ideal.reduce(&lie_action(a, f)?)?.is_zero() {
            return Err(Error::Certification(
                "a lifted matrix does not preserve the component".into(),
            ));
        }
    }
    Ok(())
}

/// Infinitesimal action of `gl(V_1) × ⋯ × gl(V_k)` on polynomials in the
/// ambient coordinates, as a basis of matrices.
pub fn expected_lie_algebra(format: &TensorFormat) -> LieBasis {
    let n = format.ambient_dimension();
    let mut all = Vec::new();
    for i in 0..format.num_factors() {
        let ni = format.dims()[i];
        for a in 0..ni {
            for b in 0..ni {
                // derivation x_a ∂/∂x_b of factor i on coefficient vectors, transposed
                let mut m = SparseMatrix::new(n, n);
                for c in 0..n {
                    let mut locals = format.split_index(c);
                    let mut exps = exponent_vector(format.factor_multiset(i, locals[i]), ni);
                    let e = exps[b];
                    if e == 0 {
                        continue;
                    }
                    exps[b] -= 1;
                    exps[a] += 1;
                    locals[i] = format.factor_index_of_exponents(i, &exps).expect("valid multiset");
                    m.add_to(c, format.join_index(&locals), Rational::from_integer(e.into()));
                }
                all.push(m);
            }
        }
    }
    let vectors: Vec<_> = all.iter().map(SparseMatrix::to_flat_vector).collect();
    let span = RowSpan::new(n * n, &vectors);
    let mut basis = Vec::new();
    let mut acc = RowSpan::new(n * n, &[]);
    let mut kept = Vec::new();
    for (m, v) in all.into_iter().zip(vectors) {
        if !acc.contains(&v) {
            kept.push(v);
            acc = RowSpan::new(n * n, &kept);
            basis.push(m);
        }
    }
    debug_assert_eq!(basis.len(), span.dim());
    LieBasis { n, basis }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Expected,
    LargerThanExpected,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Expected => "expected",
            Verdict::LargerThanExpected => "larger_than_expected",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergedCandidate {
    pub dims: Vec<usize>,
    pub expected_dim: usize,
    pub matches: bool,
}

/// Outcome of a stabilizer computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerReport {
    pub format: TensorFormat,
    pub construction: String,
    pub degree: usize,
    pub component_dim: usize,
    pub dim_actual: usize,
    pub dim_expected: usize,
    pub verdict: Verdict,
    pub certified: bool,
    pub bracket_closed: bool,
    /// The per-factor `gl` action lies in the computed algebra.
    pub contains_expected: bool,
    pub merged_candidates: Vec<MergedCandidate>,
    pub merged_match: Option<Vec<usize>>,
    /// Consequence for the full group, stated as an inference rather than computed.
    pub inference: Option<String>,
    pub stats: AnnihilatorStats,
}

/// Compares the computed algebra with the expected one and, when it is
/// larger, with the expected algebras of merged formats.
pub fn preserver_verdict(
    lb: &LieBasis,
    stats: &AnnihilatorStats,
    ideal: &LinearSubspace,
    format: &TensorFormat,
    construction: &str,
    merged: &[Vec<usize>],
) -> StabilizerReport {
    let dim_actual = lb.dim();
    let dim_expected = expected_preserver_dim(format.dims());
    let span = lb.span();
    let contains_expected = expected_lie_algebra(format)
        .basis
        .iter()
        .all(|m| span.contains(&m.to_flat_vector()));
    let verdict = if !stats.certified {
        Verdict::Inconclusive
    } else if dim_actual == dim_expected {
        Verdict::Expected
    } else if dim_actual > dim_expected {
        Verdict::LargerThanExpected
    } else {
        Verdict::Inconclusive
    };
    let mut merged_candidates = Vec::new();
    if verdict == Verdict::LargerThanExpected {
        let mut options: Vec<Vec<usize>> = merged.to_vec();
        if format.is_multilinear() {
            for part in set_partitions(format.num_factors()).into_iter().filter(|p| !p.is_discrete()) {
                let dims = part.merged_dims(format.dims());
                if !options.contains(&dims) {
                    options.push(dims);
                }
            }
        }
        for dims in options {
            let expected_dim = expected_preserver_dim(&dims);
            merged_candidates.push(MergedCandidate {
                matches: expected_dim == dim_actual,
                dims,
                expected_dim,
            });
        }
    }
    let merged_match = merged_candidates.iter().find(|c| c.matches).map(|c| c.dims.clone());
    let inference = (verdict == Verdict::Expected).then(|| inference_statement(format));
    StabilizerReport {
        format: format.clone(),
        construction: construction.to_string(),
        degree: ideal.degree(),
        component_dim: ideal.dim(),
        dim_actual,
        dim_expected,
        verdict,
        certified: stats.certified,
        bracket_closed: bracket_closure_check(lb),
        contains_expected,
        merged_candidates,
        merged_match,
        inference,
        stats: stats.clone(),
    }
}

fn inference_statement(format: &TensorFormat) -> String {
    let factors: Vec<String> = (1..=format.num_factors()).map(|i| format!("V{i}")).collect();
    let groups: Vec<String> = format
        .interchangeable_factors()
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|g| {
            let names: Vec<String> = g.iter().map(|i| format!("V{}", i + 1)).collect();
            format!("S{} on {{{}}}", g.len(), names.join(","))
        })
        .collect();
    let tail = if groups.is_empty() {
        "S̃ is trivial (no two factors share dimension and degree)".to_string()
    } else {
        format!("S̃ = {} (factors of equal dimension and degree)", groups.join(" × "))
    };
    format!(
        "inferred, not computed: the identity component of the preserver is G({}), so the full preserver is G({}) ⋊ S̃; {}",
        factors.join(", "),
        factors.join(", "),
        tail
    )
}

/// Computes the annihilator of `ideal` and issues the verdict.
pub fn stabilizer_report(
    ideal: &LinearSubspace,
    format: &TensorFormat,
    construction: &str,
    merged: &[Vec<usize>],
    primes: &PrimeSet,
) -> Result<(StabilizerReport, LieBasis)> {
    let (lb, stats) = lie_annihilator_with(ideal, format, primes)?;
    Ok((preserver_verdict(&lb, &stats, ideal, format, construction, merged), lb))
}

/// Stabilizer of the line spanned by one form.
pub fn stabilize_single_invariant(f: &Poly, format: &TensorFormat, primes: &PrimeSet) -> Result<(StabilizerReport, LieBasis)> {
    if f.is_zero() {
        return Err(Error::InvalidFormat("the invariant is zero".into()));
    }
    let ideal = crate::poly::echelonize(std::slice::from_ref(f), f.degree())?;
    stabilizer_report(&ideal, format, "single invariant", &[], primes)
}

/// Identity matrix flattened, handy for checks.
pub fn identity_in(lb: &LieBasis) -> bool {
    let mut id = SparseMatrix::new(lb.n, lb.n);
    for i in 0..lb.n {
        id.set(i, i, Rational::one());
    }
    lb.contains(&id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::Bipartition;
    use crate::equations::{bipartition_flattening, minors, secant_degree_component, segre_degree2_component};
    use crate::poly::{echelonize, rat};
    use rand::{Rng, SeedableRng};

    fn fmt(dims: &[usize]) -> TensorFormat {
        TensorFormat::multilinear(dims.to_vec()).unwrap()
    }

    fn primes() -> PrimeSet {
        PrimeSet::auto(7)
    }

    #[test]
    fn det2_similitudes() {
        let f = fmt(&[2, 2]);
        let ideal = segre_degree2_component(&f).unwrap();
        let (report, lb) = stabilizer_report(&ideal, &f, "det2", &[], &primes()).unwrap();
        assert_eq!(lb.dim(), 7);
        assert!(report.bracket_closed && report.certified && report.contains_expected);
        assert_eq!(report.verdict, Verdict::Expected);
        assert!(identity_in(&lb));
    }

    #[test]
    fn segre_three_qubits() {
        let f = fmt(&[2, 2, 2]);
        let ideal = segre_degree2_component(&f).unwrap();
        let (report, _) = stabilizer_report(&ideal, &f, "segre", &[], &primes()).unwrap();
        assert_eq!(report.dim_actual, 10);
        assert_eq!(report.verdict, Verdict::Expected);
        assert!(report.inference.unwrap().contains("S3"));
    }

    #[test]
    fn det3_in_nine_variables() {
        let f = fmt(&[3, 3]);
        let det = minors(&bipartition_flattening(&f, &Bipartition::parse("1|2", 2).unwrap()).unwrap(), 3);
        let (report, _) = stabilize_single_invariant(&det[0], &f, &primes()).unwrap();
        assert_eq!(report.dim_actual, 17);
        assert_eq!(report.verdict, Verdict::Expected);
    }

    #[test]
    fn product_of_variables_keeps_the_torus() {
        let f = TensorFormat::multilinear(vec![4]).unwrap();
        let m = Poly::monomial(Monomial::from_vars(vec![0, 1, 2, 3]), rat(1));
        let (report, lb) = stabilize_single_invariant(&m, &f, &primes()).unwrap();
        assert_eq!(lb.dim(), 4);
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn four_qubit_secant() {
        let f = fmt(&[2, 2, 2, 2]);
        let ideal = secant_degree_component(&f, 2).unwrap();
        let (report, _) = stabilizer_report(&ideal, &f, "secant 2", &[], &primes()).unwrap();
        assert_eq!(report.dim_actual, 13);
        assert_eq!(report.verdict, Verdict::Expected);
        assert!(report.bracket_closed);
    }

    #[test]
    fn merged_format_is_detected() {
        let f = fmt(&[2, 2, 5]);
        let ideal = secant_degree_component(&f, 2).unwrap();
        let (report, _) = stabilizer_report(&ideal, &f, "secant 2", &[], &primes()).unwrap();
        assert_eq!(report.dim_actual, 40);
        assert_eq!(report.verdict, Verdict::LargerThanExpected);
        assert_eq!(report.merged_match, Some(vec![4, 5]));
        assert!(report.contains_expected);
    }

    #[test]
    fn bracket_examples() {
        let mut e12 = SparseMatrix::new(3, 3);
        e12.set(0, 1, rat(1));
        let mut e23 = SparseMatrix::new(3, 3);
        e23.set(1, 2, rat(1));
        assert!(!bracket_closure_check(&LieBasis { n: 3, basis: vec![e12.clone(), e23] }));
        assert!(bracket_closure_check(&LieBasis { n: 3, basis: vec![e12] }));
    }

    #[test]
    fn expected_algebra_dimension_and_embedding() {
        for (dims, degrees) in [(vec![2, 2, 2], vec![1, 1, 1]), (vec![3], vec![3]), (vec![2, 3], vec![2, 1])] {
            let f = TensorFormat::new(dims.clone(), degrees).unwrap();
            let e = expected_lie_algebra(&f);
            assert_eq!(e.dim(), expected_preserver_dim(&dims));
            assert!(bracket_closure_check(&e));
            let ideal = segre_degree2_component(&f).unwrap();
            let lb = lie_annihilator(&ideal, &f).unwrap();
            assert!(e.basis.iter().all(|m| lb.contains(m)));
        }
    }

    #[test]
    fn more_generators_never_enlarge() {
        let f = fmt(&[2, 2, 2]);
        let full = segre_degree2_component(&f).unwrap();
        let one_flat = echelonize(&minors(&bipartition_flattening(&f, &Bipartition::parse("1|23", 3).unwrap()).unwrap(), 2), 2).unwrap();
        let small = lie_annihilator(&one_flat, &f).unwrap().dim();
        let big = lie_annihilator(&full, &f).unwrap().dim();
        assert!(big <= small, "{big} > {small}");
    }

    #[test]
    fn generic_change_of_basis_keeps_dimension() {
        let f = fmt(&[2, 2, 2]);
        let ideal = segre_degree2_component(&f).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 8;
        for _ in 0..2 {
            // g = L·U with unit triangular factors, hence invertible
            let tri = |rng: &mut rand_chacha::ChaCha8Rng, lower: bool| -> SparseMatrix {
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
            let g = tri(&mut rng, true).matmul(&tri(&mut rng, false));
            let images: Vec<Poly> = (0..n)
                .map(|v| {
                    let mut p = Poly::zero(1);
                    for (w, x) in g.row(v) {
                        p = p.add(&Poly::var(w).scale(x));
                    }
                    p
                })
                .collect();
            let moved: Vec<Poly> = ideal.basis().map(|q| q.substitute_linear(&images).unwrap()).collect();
            let moved = echelonize(&moved, 2).unwrap();
            assert_eq!(moved.dim(), ideal.dim());
            assert!(!moved.basis().all(|q| q.is_weight_homogeneous(&f)));
            assert_eq!(lie_annihilator(&moved, &f).unwrap().dim(), 10);
        }
    }

    #[test]
    fn zero_component_is_rejected() {
        let f = fmt(&[2, 2]);
        assert!(lie_annihilator(&LinearSubspace::empty(2), &f).is_err());
    }

    #[test]
    fn rational_coefficients_survive() {
        let f = fmt(&[2, 2]);
        let g = Poly::var(0).mul(&Poly::var(3)).scale(&crate::poly::ratio(1, 3)).sub(&Poly::var(1).mul(&Poly::var(2)));
        let (report, _) = stabilize_single_invariant(&g, &f, &primes()).unwrap();
        assert_eq!(report.dim_actual, 7);
    }
}
