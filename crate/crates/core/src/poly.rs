//! Homogeneous polynomials with arbitrary-precision rational coefficients.
//!
//! Dual monomials act by plain iterated differentiation (`∂^a`, no factorial
//! normalization). A matrix `A` acts on polynomials as the derivation
//! `A·f = Σ a_uv x_u ∂f/∂x_v`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::linalg::{row_space_exact, SparseMatrix};
use crate::tensor::{Monomial, TensorFormat};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A homogeneous polynomial of fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    degree: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(degree: usize) -> Self {
        Poly {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(Monomial::one(), c)
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero(m.degree());
        p.add_term(m, c);
        p
    }

    pub fn var(v: usize) -> Self {
        Poly::monomial(Monomial::var(v), Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(degree: usize, terms: I) -> Result<Self> {
        let mut p = Poly::zero(degree);
        for (m, c) in terms {
            if m.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: m.degree(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&Rational> {
        self.terms.get(m)
    }

    /// Smallest monomial in the fixed order, with its coefficient.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.degree(), self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Poly, c: &Rational) {
        if c.is_zero() {
            return;
        }
        assert_eq!(self.degree, other.degree, "adding polynomials of different degrees");
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.degree);
        }
        Poly {
            degree: self.degree,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.degree + other.degree);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(Rational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact value at a point of length `N`.
    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        if point.iter().all(|x| x.is_integer()) && self.terms.values().all(|c| c.is_integer()) {
            let ints: Vec<BigInt> = point.iter().map(|x| x.to_integer()).collect();
            return Rational::from_integer(self.evaluate_integral(&ints));
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for &v in m.vars() {
                prod *= &point[v as usize];
            }
            total += prod;
        }
        total
    }

    fn evaluate_integral(&self, point: &[BigInt]) -> BigInt {
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut prod = c.numer().clone();
            for &v in m.vars() {
                prod *= &point[v as usize];
            }
            total += prod;
        }
        total
    }

    /// Value modulo `p`; `None` if a coefficient denominator vanishes mod `p`.
    pub fn evaluate_mod(&self, point: &[u64], p: u64) -> Option<u64> {
        let mut total = 0u64;
        for (m, c) in &self.terms {
            let mut prod = crate::linalg::rational_mod(c, p)?;
            for &v in m.vars() {
                prod = prod * point[v as usize] % p;
            }
            total = (total + prod) % p;
        }
        Some(total)
    }

    /// Substitutes `x_v ↦ images[v]` for degree-one images.
    pub fn substitute_linear(&self, images: &[Poly]) -> Result<Poly> {
        if let Some(bad) = images.iter().find(|q| q.degree != 1) {
            return Err(Error::DegreeMismatch {
                expected: 1,
                found: bad.degree,
            });
        }
        let mut out = Poly::zero(self.degree);
        for (m, c) in &self.terms {
            let mut prod = Poly::constant(c.clone());
            for (v, e) in m.exponents() {
                let img = images.get(v).ok_or(Error::DimensionMismatch {
                    expected: v + 1,
                    found: images.len(),
                })?;
                prod = prod.mul(&img.pow(e));
            }
            out.add_scaled(&prod, &Rational::one());
        }
        Ok(out)
    }

    /// Relabels coordinates through `perm` (monomial by monomial).
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        let mut out = Poly::zero(self.degree);
        for (m, c) in &self.terms {
            out.add_term(m.map_vars(|x| perm[x as usize] as u32), c.clone());
        }
        out
    }

    /// Integer normalization: denominators cleared, content one, first term positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .terms
            .values()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut content = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if ints[0].is_negative() {
            content = -content;
        }
        Poly {
            degree: self.degree,
            terms: self
                .terms
                .keys()
                .cloned()
                .zip(ints)
                .map(|(m, x)| (m, Rational::from_integer(x / &content)))
                .collect(),
        }
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// True if `self = λ·other` for some nonzero rational `λ`.
    pub fn is_proportional(&self, other: &Poly) -> bool {
        if self.degree != other.degree || self.len() != other.len() || self.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        let (m0, a0) = self.leading().unwrap();
        let Some(b0) = other.coeff(m0) else {
            return false;
        };
        let lambda = a0 / b0;
        other.terms.iter().all(|(m, b)| self.terms.get(m) == Some(&(b * &lambda)))
    }

    /// True if all terms share one torus weight.
    pub fn is_weight_homogeneous(&self, format: &TensorFormat) -> bool {
        let mut ws = self.terms.keys().map(|m| crate::tensor::flat_weight(m, format));
        match ws.next() {
            None => true,
            Some(first) => ws.all(|w| w == first),
        }
    }

    pub fn display<'a>(&'a self, format: &'a TensorFormat) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, format }
    }

    /// Parses `c1*mono1 + c2*mono2 - ...`; the degree of the zero polynomial
    /// is taken from `zero_degree`.
    pub fn parse(s: &str, format: &TensorFormat, zero_degree: usize) -> Result<Poly> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Poly::zero(zero_degree));
        }
        let mut terms = Vec::new();
        let mut sign = 1i64;
        let mut cur = String::new();
        let mut depth = 0i32;
        let flush = |cur: &mut String, sign: i64, terms: &mut Vec<(Monomial, Rational)>| -> Result<()> {
            let body = cur.trim();
            if body.is_empty() {
                return Err(Error::Parse("empty term".into()));
            }
            let (coef, mono) = split_term(body, format)?;
            terms.push((mono, coef * rat(sign)));
            cur.clear();
            Ok(())
        };
        for ch in s.chars() {
            match ch {
                '[' => {
                    depth += 1;
                    cur.push(ch);
                }
                ']' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '+' | '-' if depth == 0 => {
                    if !cur.trim().is_empty() {
                        flush(&mut cur, sign, &mut terms)?;
                        sign = 1;
                    }
                    if ch == '-' {
                        sign = -sign;
                    }
                }
                '\n' | '\r' => cur.push(' '),
                _ => cur.push(ch),
            }
        }
        flush(&mut cur, sign, &mut terms)?;
        let degree = terms[0].0.degree();
        Poly::from_terms(degree, terms)
    }
}

fn split_term(body: &str, format: &TensorFormat) -> Result<(Rational, Monomial)> {
    let first = body.split('*').next().unwrap().trim();
    if first.starts_with('t') {
        return Ok((Rational::one(), Monomial::parse(body, format)?));
    }
    let coef = parse_rational(first)?;
    match body.split_once('*') {
        Some((_, rest)) => Ok((coef, Monomial::parse(rest, format)?)),
        None => Ok((coef, Monomial::one())),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    format: &'a TensorFormat,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", m.label(self.format))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), m.label(self.format))?;
            }
        }
        Ok(())
    }
}

fn falling_factorial(n: u32, k: u32) -> u64 {
    (0..k).map(|i| (n - i) as u64).product()
}

/// Apolarity pairing `op ⌟ f`: each dual monomial `x^a` acts as `∂^a`.
pub fn contract(op: &Poly, f: &Poly) -> Result<Poly> {
    if op.degree > f.degree {
        return Err(Error::DegreeMismatch {
            expected: f.degree,
            found: op.degree,
        });
    }
    let mut out = Poly::zero(f.degree - op.degree);
    for (a, ca) in &op.terms {
        for (b, cb) in &f.terms {
            let Some(rest) = b.divide(a) else { continue };
            let mult: u64 = a
                .exponents()
                .map(|(v, e)| falling_factorial(b.exponent_of(v), e))
                .product();
            out.add_term(rest, ca * cb * rat(mult as i64));
        }
    }
    Ok(out)
}

/// `A·f = Σ a_uv x_u ∂f/∂x_v`.
pub fn lie_action(a: &SparseMatrix, f: &Poly) -> Result<Poly> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    if let Some(v) = f.terms.keys().flat_map(|m| m.vars().iter()).find(|&&v| v as usize >= n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: *v as usize + 1,
        });
    }
    let columns = a.columns();
    let mut out = Poly::zero(f.degree);
    for (m, c) in &f.terms {
        for (v, e) in m.exponents() {
            if columns[v].is_empty() {
                continue;
            }
            let base = m.without_var(v).expect("variable divides");
            let ce = c * rat(e as i64);
            for (u, auv) in &columns[v] {
                out.add_term(base.times_var(*u), &ce * *auv);
            }
        }
    }
    Ok(out)
}

pub fn evaluate(f: &Poly, point: &[Rational]) -> Result<Rational> {
    if let Some(&v) = f.terms.keys().flat_map(|m| m.vars().iter()).max() {
        if v as usize >= point.len() {
            return Err(Error::DimensionMismatch {
                expected: v as usize + 1,
                found: point.len(),
            });
        }
    }
    Ok(f.evaluate(point))
}

/// A subspace of degree-`δ` forms in reduced echelon form.
///
/// Each basis element has a pivot (its smallest monomial) with coefficient
/// one, and no pivot occurs in any other basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSubspace {
    degree: usize,
    rows: BTreeMap<Monomial, Poly>,
}

impl LinearSubspace {
    pub fn empty(degree: usize) -> Self {
        LinearSubspace {
            degree,
            rows: BTreeMap::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Basis elements ordered by pivot.
    pub fn basis(&self) -> impl Iterator<Item = &Poly> {
        self.rows.values()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &Monomial> {
        self.rows.keys()
    }

    pub fn row_for_pivot(&self, m: &Monomial) -> Option<&Poly> {
        self.rows.get(m)
    }

    /// `f` minus its projection along the pivot monomials.
    pub fn reduce(&self, f: &Poly) -> Result<Poly> {
        if f.degree != self.degree && !f.is_zero() {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: f.degree,
            });
        }
        let mut out = f.clone();
        for (m, c) in &f.terms {
            if let Some(row) = self.rows.get(m) {
                out.add_scaled(row, &-c);
            }
        }
        Ok(out)
    }

    pub fn contains(&self, f: &Poly) -> Result<bool> {
        Ok(self.reduce(f)?.is_zero())
    }

    /// Adds `f` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, f: &Poly) -> Result<bool> {
        let r = self.reduce(f)?;
        let Some((pivot, lead)) = r.leading() else {
            return Ok(false);
        };
        let pivot = pivot.clone();
        let r = r.scale(&lead.recip());
        for row in self.rows.values_mut() {
            if let Some(c) = row.terms.get(&pivot).cloned() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(pivot, r);
        Ok(true)
    }

    /// Appends a row already reduced against, and not occurring in, the others.
    fn push_reduced_row(&mut self, row: Poly) {
        let (pivot, _) = row.leading().expect("nonzero row");
        self.rows.insert(pivot.clone(), row);
    }

    pub fn is_subspace_of(&self, other: &LinearSubspace) -> Result<bool> {
        for b in self.basis() {
            if !other.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Reduced echelon basis of the span of `polys`.
pub fn echelonize(polys: &[Poly], degree: usize) -> Result<LinearSubspace> {
    check_degrees(polys, degree)?;
    let mut sub = LinearSubspace::empty(degree);
    for row in echelon_rows(polys.iter()) {
        sub.push_reduced_row(row);
    }
    Ok(sub)
}

/// Same span as [`echelonize`]; when every input is weight-homogeneous the
/// elimination runs separately on each weight space.
pub fn echelonize_graded(polys: &[Poly], degree: usize, format: &TensorFormat) -> Result<LinearSubspace> {
    check_degrees(polys, degree)?;
    if !polys.iter().all(|f| f.is_weight_homogeneous(format)) {
        return echelonize(polys, degree);
    }
    let mut groups: HashMap<Vec<u32>, Vec<&Poly>> = HashMap::new();
    for f in polys.iter().filter(|f| !f.is_zero()) {
        let (m, _) = f.leading().expect("nonzero");
        groups.entry(crate::tensor::flat_weight(m, format)).or_default().push(f);
    }
    let blocks: Vec<Vec<Poly>> = groups.into_values().collect::<Vec<_>>().into_par_iter().map(|g| echelon_rows(g.into_iter())).collect();
    let mut sub = LinearSubspace::empty(degree);
    for row in blocks.into_iter().flatten() {
        sub.push_reduced_row(row);
    }
    Ok(sub)
}

fn check_degrees(polys: &[Poly], degree: usize) -> Result<()> {
    match polys.iter().find(|f| !f.is_zero() && f.degree != degree) {
        Some(f) => Err(Error::DegreeMismatch {
            expected: degree,
            found: f.degree,
        }),
        None => Ok(()),
    }
}

/// Reduced row echelon form over the monomials occurring in the input.
fn echelon_rows<'a>(polys: impl Iterator<Item = &'a Poly>) -> Vec<Poly> {
    let polys: Vec<&Poly> = polys.filter(|f| !f.is_zero()).collect();
    let Some(first) = polys.first() else {
        return Vec::new();
    };
    let degree = first.degree;
    let monos: Vec<Monomial> = polys
        .iter()
        .flat_map(|f| f.terms.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let rows = polys
        .iter()
        .map(|f| f.terms.iter().map(|(m, c)| (index[m], c.clone())).collect())
        .collect();
    let matrix = SparseMatrix::from_rows(monos.len(), rows);
    row_space_exact(&matrix)
        .into_iter()
        .map(|v| Poly {
            degree,
            terms: v.entries.into_iter().map(|(i, c)| (monos[i].clone(), c)).collect(),
        })
        .collect()
}

pub fn reduce(sub: &LinearSubspace, f: &Poly) -> Result<Poly> {
    sub.reduce(f)
}
