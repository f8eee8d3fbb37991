//! Exact and modular linear algebra.
//!
//! Exact elimination works on integer rows (denominators cleared, content
//! removed after every step) and only converts to rationals when reading off
//! a kernel. Modular elimination works over `Z/p` for primes below `2^32`,
//! so products of two residues fit in a `u64`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

type Rational = BigRational;

/// Sparse rational matrix with rows stored as sorted `(column, value)` lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Rational>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMatrix::new(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = SparseMatrix::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let dense: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect();
        SparseMatrix::from_dense(&dense)
    }

    /// Builds from sparse rows; duplicate columns are summed, zeros dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, Rational)>>) -> Self {
        let mut m = SparseMatrix::new(rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, x) in row {
                m.add_to(i, j, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.data[r].get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, x: Rational) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        if x.is_zero() {
            self.data[r].remove(&c);
        } else {
            self.data[r].insert(c, x);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, x: Rational) {
        let cur = self.get(r, c);
        self.set(r, c, cur + x);
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &Rational)> {
        self.data[r].iter().map(|(&c, x)| (c, x))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(&c, x)| (r, c, x)))
    }

    /// Column view: for each column, its `(row, value)` entries.
    pub fn columns(&self) -> Vec<Vec<(usize, &Rational)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, c, x) in self.entries() {
            cols[c].push((r, x));
        }
        cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BTreeMap::is_empty)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.cols, self.rows);
        for (r, c, x) in self.entries() {
            t.set(c, r, x.clone());
        }
        t
    }

    pub fn scale(&self, c: &Rational) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.rows, self.cols);
        for (r, col, x) in self.entries() {
            out.set(r, col, x * c);
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = self.clone();
        for (r, c, x) in other.entries() {
            out.add_to(r, c, x.clone());
        }
        out
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = SparseMatrix::new(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (k, x) in row {
                for (c, y) in &other.data[*k] {
                    *acc.entry(*c).or_insert_with(Rational::zero) += x * y;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.data[r] = acc;
        }
        out
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &SparseMatrix) -> SparseMatrix {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        self.data
            .iter()
            .map(|row| row.iter().fold(Rational::zero(), |acc, (&c, x)| acc + x * &v[c]))
            .collect()
    }

    /// Row-major flattening of the entries, as a sparse vector of length `rows·cols`.
    pub fn to_flat_vector(&self) -> SparseVector {
        SparseVector {
            len: self.rows * self.cols,
            entries: self.entries().map(|(r, c, x)| (r * self.cols + c, x.clone())).collect(),
        }
    }

    pub fn from_flat_vector(rows: usize, cols: usize, v: &SparseVector) -> SparseMatrix {
        let mut m = SparseMatrix::new(rows, cols);
        for (i, x) in &v.entries {
            m.set(i / cols, i % cols, x.clone());
        }
        m
    }

    /// Reduction modulo `p` as dense rows; `None` if a denominator vanishes.
    pub fn to_mod_dense(&self, p: u64) -> Option<Vec<Vec<u64>>> {
        let mut out = vec![vec![0u64; self.cols]; self.rows];
        for (r, c, x) in self.entries() {
            out[r][c] = rational_mod(x, p)?;
        }
        Some(out)
    }
}

/// Sparse rational vector with sorted indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseVector {
    pub len: usize,
    pub entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn to_dense(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.len];
        for (i, x) in &self.entries {
            v[*i] = x.clone();
        }
        v
    }

    pub fn from_dense(v: &[Rational]) -> Self {
        SparseVector {
            len: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (i, x.clone()))
                .collect(),
        }
    }
}

type IntRow = Vec<(usize, BigInt)>;

fn row_to_integers(row: &BTreeMap<usize, Rational>) -> IntRow {
    let lcm = row.values().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut out: IntRow = row
        .iter()
        .map(|(&c, x)| (c, (x * Rational::from_integer(lcm.clone())).to_integer()))
        .collect();
    remove_content(&mut out);
    out
}

fn remove_content(row: &mut IntRow) {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, x)| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for (_, x) in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// `(a/g)·r − (b/g)·s` where `a`, `b` are the entries of `s`, `r` at `col`.
fn eliminate(r: &IntRow, s: &IntRow, col: usize) -> IntRow {
    let a = &s.iter().find(|(c, _)| *c == col).expect("pivot present").1;
    let b = &r.iter().find(|(c, _)| *c == col).expect("entry present").1;
    let g = a.gcd(b);
    let (fa, fb) = (a / &g, b / &g);
    let mut out = Vec::with_capacity(r.len() + s.len());
    let (mut i, mut j) = (0, 0);
    while i < r.len() || j < s.len() {
        let ci = r.get(i).map_or(usize::MAX, |e| e.0);
        let cj = s.get(j).map_or(usize::MAX, |e| e.0);
        let (c, x) = if ci < cj {
            i += 1;
            (ci, &fa * &r[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(&fb * &s[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, &fa * &r[i - 1].1 - &fb * &s[j - 1].1)
        };
        if !x.is_zero() {
            out.push((c, x));
        }
    }
    remove_content(&mut out);
    out
}

/// Integer row echelon form: rows with strictly increasing pivot columns.
struct IntEchelon {
    cols: usize,
    rows: Vec<IntRow>,
}

impl IntEchelon {
    /// Column-by-column elimination. Pivot rule: smallest column index, then
    /// the sparsest candidate row (earliest on ties).
    fn build(cols: usize, input: Vec<IntRow>) -> Self {
        let mut buckets: BTreeMap<usize, Vec<IntRow>> = BTreeMap::new();
        for row in input.into_iter().filter(|r| !r.is_empty()) {
            buckets.entry(row[0].0).or_default().push(row);
        }
        let mut rows = Vec::new();
        while let Some((col, mut bucket)) = buckets.pop_first() {
            let best = (0..bucket.len()).min_by_key(|&i| bucket[i].len()).unwrap();
            let pivot = bucket.remove(best);
            for r in bucket {
                let red = eliminate(&r, &pivot, col);
                if let Some(&(lead, _)) = red.first() {
                    buckets.entry(lead).or_default().push(red);
                }
            }
            rows.push(pivot);
        }
        IntEchelon { cols, rows }
    }

    fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0).collect()
    }

    /// Back-substitution to reduced form (still integral, pivots not normalized).
    fn reduce_fully(&mut self) {
        let pivots = self.pivots();
        let index: BTreeMap<usize, usize> = pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        for i in (0..self.rows.len()).rev() {
            let targets: Vec<usize> = self.rows[i]
                .iter()
                .skip(1)
                .filter_map(|(c, _)| index.get(c).copied())
                .collect();
            for j in targets {
                let reduced = eliminate(&self.rows[i], &self.rows[j], pivots[j]);
                self.rows[i] = reduced;
            }
        }
    }

    fn kernel(mut self) -> Vec<SparseVector> {
        self.reduce_fully();
        let pivots = self.pivots();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let mut basis: BTreeMap<usize, Vec<(usize, Rational)>> = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|c| (c, vec![(c, Rational::one())]))
            .collect();
        for row in &self.rows {
            let (pc, lead) = (&row[0].0, &row[0].1);
            for (c, x) in row.iter().skip(1) {
                let v = basis.get_mut(c).expect("non-pivot column");
                v.push((*pc, -Rational::new(x.clone(), lead.clone())));
            }
        }
        basis
            .into_values()
            .map(|mut entries| {
                entries.sort_by_key(|e| e.0);
                SparseVector {
                    len: self.cols,
                    entries,
                }
            })
            .collect()
    }
}

fn int_rows(m: &SparseMatrix) -> Vec<IntRow> {
    m.data.iter().map(row_to_integers).collect()
}

pub fn rank_exact(m: &SparseMatrix) -> usize {
    IntEchelon::build(m.cols, int_rows(m)).rows.len()
}

/// Basis of the right kernel, one vector per free column (that entry set to one).
pub fn nullspace_exact(m: &SparseMatrix) -> Vec<SparseVector> {
    let kernel = IntEchelon::build(m.cols, int_rows(m)).kernel();
    for v in &kernel {
        debug_assert!(m.mul_vec(&v.to_dense()).iter().all(Zero::is_zero));
    }
    kernel
}

/// Reduced row echelon basis of the row space, pivots normalized to one.
pub fn row_space_exact(m: &SparseMatrix) -> Vec<SparseVector> {
    let mut ech = IntEchelon::build(m.cols, int_rows(m));
    ech.reduce_fully();
    ech.rows
        .into_iter()
        .map(|row| {
            let lead = row[0].1.clone();
            SparseVector {
                len: m.cols,
                entries: row
                    .into_iter()
                    .map(|(c, x)| (c, Rational::new(x, lead.clone())))
                    .collect(),
            }
        })
        .collect()
}

/// Span of rational vectors kept in reduced row echelon form.
#[derive(Clone, Debug, Default)]
pub struct RowSpan {
    len: usize,
    rows: BTreeMap<usize, BTreeMap<usize, Rational>>,
}

impl RowSpan {
    pub fn new(len: usize, vectors: &[SparseVector]) -> Self {
        let m = SparseMatrix::from_rows(len, vectors.iter().map(|v| v.entries.clone()).collect());
        let rows = row_space_exact(&m)
            .into_iter()
            .map(|v| (v.entries[0].0, v.entries.into_iter().collect()))
            .collect();
        RowSpan { len, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &SparseVector) -> SparseVector {
        let mut acc: BTreeMap<usize, Rational> = v.entries.iter().cloned().collect();
        for (c, x) in &v.entries {
            if let Some(row) = self.rows.get(c) {
                for (j, y) in row {
                    *acc.entry(*j).or_insert_with(Rational::zero) -= x * y;
                }
            }
        }
        SparseVector {
            len: self.len,
            entries: acc.into_iter().filter(|(_, x)| !x.is_zero()).collect(),
        }
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).entries.is_empty()
    }
}

// ---------------------------------------------------------------------------
// modular arithmetic

pub fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn mod_inv(a: u64, p: u64) -> Option<u64> {
    if a.is_multiple_of(p) {
        return None;
    }
    Some(mod_pow(a, p - 2, p))
}

pub fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

/// Image of a rational in `Z/p`; `None` if `p` divides the denominator.
pub fn rational_mod(x: &Rational, p: u64) -> Option<u64> {
    let n = bigint_mod(x.numer(), p);
    let d = mod_inv(bigint_mod(x.denom(), p), p)?;
    Some(n * d % p)
}

pub fn i64_mod(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const PRIME_LO: u64 = 1 << 30;
const PRIME_HI: u64 = 1 << 31;

/// A set of distinct primes used for modular computations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeSet {
    primes: Vec<u64>,
    /// Minimum number of primes that must agree on a modular result.
    pub min_agree: usize,
}

impl PrimeSet {
    /// Explicit primes: distinct, at least two, each below `2^32`.
    pub fn new(primes: Vec<u64>) -> Result<Self> {
        if primes.len() < 2 {
            return Err(Error::InvalidFormat("a prime set needs at least two primes".into()));
        }
        for (i, &p) in primes.iter().enumerate() {
            if p >= 1 << 32 || !is_prime(p) {
                return Err(Error::InvalidFormat(format!("{p} is not a prime below 2^32")));
            }
            if primes[..i].contains(&p) {
                return Err(Error::InvalidFormat(format!("prime {p} listed twice")));
            }
        }
        let min_agree = primes.len();
        Ok(PrimeSet { primes, min_agree })
    }

    /// `count` random primes in `(2^30, 2^31)`, deterministic in `seed`.
    pub fn random(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ee_d0f9_e1e5);
        let mut primes = Vec::with_capacity(count);
        while primes.len() < count {
            let p = next_prime(rng.gen_range(PRIME_LO..PRIME_HI));
            if p < PRIME_HI && !primes.contains(&p) {
                primes.push(p);
            }
        }
        PrimeSet {
            min_agree: count,
            primes,
        }
    }

    /// Default policy: three random 31-bit primes, all must agree.
    pub fn auto(seed: u64) -> Self {
        Self::random(3, seed)
    }

    /// Parses `auto` or a comma-separated prime list.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(Self::auto(seed));
        }
        let primes = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad prime `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(primes)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Returns a fresh prime not yet in the set, above the current maximum.
    pub fn fresh_prime(&self) -> u64 {
        let mut p = next_prime(self.primes.iter().copied().max().unwrap_or(PRIME_LO).max(PRIME_LO) + 1);
        while self.primes.contains(&p) {
            p = next_prime(p + 1);
        }
        p
    }

    pub fn push_fresh(&mut self) -> u64 {
        let p = self.fresh_prime();
        self.primes.push(p);
        p
    }

    pub fn replace(&mut self, old: u64) -> u64 {
        let p = self.fresh_prime();
        for q in &mut self.primes {
            if *q == old {
                *q = p;
            }
        }
        p
    }
}

pub fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Incremental dense echelon form over `Z/p`.
///
/// Stored rows have a leading one and zeros left of it.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    p: u64,
    width: usize,
    rows: Vec<Vec<u64>>,
    pivot_row: Vec<Option<usize>>,
}

impl ModEchelon {
    pub fn new(width: usize, p: u64) -> Self {
        ModEchelon {
            p,
            width,
            rows: Vec::new(),
            pivot_row: vec![None; width],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.width
    }

    /// Inserts a dense row; returns whether the rank grew.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.width);
        let p = self.p;
        for col in 0..self.width {
            let c = row[col];
            if c == 0 {
                continue;
            }
            match self.pivot_row[col] {
                Some(ri) => {
                    let neg = p - c;
                    let pr = &self.rows[ri];
                    for j in col..self.width {
                        if pr[j] != 0 {
                            row[j] = (row[j] + neg * pr[j]) % p;
                        }
                    }
                }
                None => {
                    let inv = mod_inv(c, p).expect("nonzero residue");
                    for x in &mut row[col..] {
                        *x = *x * inv % p;
                    }
                    self.pivot_row[col] = Some(self.rows.len());
                    self.rows.push(row);
                    return true;
                }
            }
        }
        false
    }

    pub fn insert_sparse(&mut self, entries: &[(usize, u64)]) -> bool {
        if self.is_full() {
            return false;
        }
        let mut row = vec![0u64; self.width];
        for &(c, x) in entries {
            row[c] = (row[c] + x) % self.p;
        }
        self.insert(row)
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        (0..self.width).filter(|&c| self.pivot_row[c].is_some()).collect()
    }

    /// Canonical kernel basis: one vector per free column, that entry one.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let mut rows = self.rows.clone();
        let pivots = self.pivot_columns();
        // back-substitute in decreasing pivot order
        for &pc in pivots.iter().rev() {
            let ri = self.pivot_row[pc].unwrap();
            let pivot_row = rows[ri].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k == ri || row[pc] == 0 {
                    continue;
                }
                let neg = p - row[pc];
                for j in pc..self.width {
                    if pivot_row[j] != 0 {
                        row[j] = (row[j] + neg * pivot_row[j]) % p;
                    }
                }
            }
        }
        let free: Vec<usize> = (0..self.width).filter(|&c| self.pivot_row[c].is_none()).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u64; self.width];
                v[f] = 1;
                for &pc in &pivots {
                    let x = rows[self.pivot_row[pc].unwrap()][f];
                    v[pc] = (p - x) % p;
                }
                v
            })
            .collect()
    }
}

pub fn rank_mod_p(m: &SparseMatrix, p: u64) -> Option<usize> {
    let dense = m.to_mod_dense(p)?;
    let mut ech = ModEchelon::new(m.cols, p);
    for row in dense {
        if ech.is_full() {
            break;
        }
        ech.insert(row);
    }
    Some(ech.rank())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularRank {
    pub rank: usize,
    pub per_prime: Vec<(u64, usize)>,
    /// All primes returned the same rank.
    pub agree: bool,
}

/// Maximum rank over the primes. A prime dividing some denominator is
/// replaced by a fresh one, at most 16 times.
pub fn rank_modular(m: &SparseMatrix, primes: &PrimeSet) -> Result<ModularRank> {
    let mut set = primes.clone();
    let mut per_prime = Vec::new();
    let mut replacements = 0;
    let mut i = 0;
    while i < set.primes.len() {
        let p = set.primes[i];
        match rank_mod_p(m, p) {
            Some(r) => {
                per_prime.push((p, r));
                i += 1;
            }
            None => {
                replacements += 1;
                if replacements > 16 {
                    return Err(Error::PrimeExhaustion(format!(
                        "{replacements} primes divided a denominator"
                    )));
                }
                set.replace(p);
            }
        }
    }
    let rank = per_prime.iter().map(|x| x.1).max().unwrap_or(0);
    let agree = per_prime.iter().all(|x| x.1 == rank);
    Ok(ModularRank { rank, per_prime, agree })
}

/// Chinese remaindering: the residue modulo `Π primes` matching every input.
pub fn crt(residues: &[u64], primes: &[u64]) -> (BigInt, BigInt) {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        // value + modulus·t ≡ r (mod p)
        let m_mod = bigint_mod(&modulus, p);
        let v_mod = bigint_mod(&value, p);
        let t = (r + p - v_mod) % p * mod_inv(m_mod, p).expect("distinct primes") % p;
        value += &modulus * BigInt::from(t);
        modulus *= BigInt::from(p);
    }
    (value, modulus)
}

/// Finds `n/d` with `|n| ≤ bound`, `0 < d ≤ bound` and `n ≡ a·d (mod m)`,
/// where `bound = ⌊√((m−1)/2)⌋`, by the half extended Euclidean algorithm.
pub fn reconstruct_rational(a: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = ((m - BigInt::one()) / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    let (n, d) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(Rational::new(n, d))
}

/// Recovers a rational vector from its images modulo each prime
/// (`residues[i]` is the vector modulo `primes[i]`), then re-reduces the
/// result modulo every prime as a check.
pub fn rational_reconstruction(residues: &[Vec<u64>], primes: &[u64]) -> Result<Vec<Rational>> {
    if residues.len() != primes.len() || primes.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: primes.len(),
            found: residues.len(),
        });
    }
    let len = residues[0].len();
    if residues.iter().any(|r| r.len() != len) {
        return Err(Error::Reconstruction("residue vectors differ in length".into()));
    }
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        let column: Vec<u64> = residues.iter().zip(primes).map(|(r, &p)| r[j] % p).collect();
        let (value, modulus) = crt(&column, primes);
        let q = reconstruct_rational(&value, &modulus)
            .ok_or_else(|| Error::Reconstruction(format!("entry {j} has no small rational preimage")))?;
        for (&r, &p) in column.iter().zip(primes) {
            if rational_mod(&q, p) != Some(r) {
                return Err(Error::Reconstruction(format!("entry {j} fails re-reduction mod {p}")));
            }
        }
        out.push(q);
    }
    Ok(out)
}
