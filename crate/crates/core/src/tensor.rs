//! Tensor formats, coordinate indexing, monomials and torus weights.
//!
//! A [`TensorFormat`] describes the ambient space `S^{d_1}V_1 ⊗ ··· ⊗ S^{d_k}V_k`
//! with `dim V_i = n_i`. A coordinate picks, for each factor, a multiset of
//! size `d_i` over `{1..n_i}`. Within a factor the multisets are ordered
//! lexicographically by their sorted index lists, and the global index is the
//! mixed-radix combination with the first factor most significant. For plain
//! matrices this is row-major order.
//!
//! Coordinates are the coefficients of the multihomogeneous polynomial
//! `Σ c_α x^α`; a rank-one point `v_1^{d_1} ⊗ ··· ⊗ v_k^{d_k}` therefore has
//! coordinates `c_α = Π_i multinomial(α_i) · v_i^{α_i}`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default cap on the number of monomials a full enumeration may produce.
pub const DEFAULT_MONOMIAL_CAP: u128 = 10_000_000;

/// Dimensions and symmetric degrees of a Segre–Veronese ambient space.
#[derive(Clone, Debug)]
pub struct TensorFormat {
    dims: Vec<usize>,
    degrees: Vec<usize>,
    // per factor: sorted index multisets (0-based), in canonical order
    multisets: Vec<Vec<Vec<u32>>>,
    lookup: Vec<HashMap<Vec<u32>, usize>>,
    strides: Vec<usize>,
    ambient: usize,
    // offset of each factor's block inside a flattened marginal vector
    marg_offsets: Vec<usize>,
    // N × Σn_i table of per-coordinate marginals
    marginals: Vec<u32>,
}

impl PartialEq for TensorFormat {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.degrees == other.degrees
    }
}

impl Eq for TensorFormat {}

#[derive(Serialize, Deserialize)]
struct FormatRepr {
    dims: Vec<usize>,
    degrees: Vec<usize>,
}

impl Serialize for TensorFormat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormatRepr {
            dims: self.dims.clone(),
            degrees: self.degrees.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorFormat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FormatRepr::deserialize(d)?;
        TensorFormat::new(repr.dims, repr.degrees).map_err(serde::de::Error::custom)
    }
}

impl TensorFormat {
    pub fn new(dims: Vec<usize>, degrees: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidFormat("at least one factor is required".into()));
        }
        if dims.len() != degrees.len() {
            return Err(Error::InvalidFormat(format!(
                "{} dimensions but {} degrees",
                dims.len(),
                degrees.len()
            )));
        }
        if dims.contains(&0) || degrees.contains(&0) {
            return Err(Error::InvalidFormat("dimensions and degrees must be positive".into()));
        }
        let sizes: Vec<u128> = dims
            .iter()
            .zip(&degrees)
            .map(|(&n, &d)| binomial((n + d - 1) as u128, d as u128))
            .collect();
        let ambient = sizes
            .iter()
            .try_fold(1u128, |acc, &s| acc.checked_mul(s))
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::InvalidFormat("ambient dimension too large".into()))?
            as usize;

        let multisets: Vec<Vec<Vec<u32>>> = dims
            .iter()
            .zip(&degrees)
            .map(|(&n, &d)| multisets_of(n as u32, d))
            .collect();
        let lookup = multisets
            .iter()
            .zip(&dims)
            .map(|(list, &n)| {
                list.iter()
                    .enumerate()
                    .map(|(i, ms)| (exponent_vector(ms, n), i))
                    .collect()
            })
            .collect();
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * multisets[i + 1].len();
        }
        let mut marg_offsets = Vec::with_capacity(dims.len());
        let mut width = 0;
        for &n in &dims {
            marg_offsets.push(width);
            width += n;
        }
        let mut marginals = vec![0u32; ambient * width];
        for c in 0..ambient {
            let mut rest = c;
            for (i, stride) in strides.iter().enumerate() {
                let local = rest / stride;
                rest %= stride;
                for &a in &multisets[i][local] {
                    marginals[c * width + marg_offsets[i] + a as usize] += 1;
                }
            }
        }
        Ok(TensorFormat {
            dims,
            degrees,
            multisets,
            lookup,
            strides,
            ambient,
            marg_offsets,
            marginals,
        })
    }

    /// All degrees equal to one: the Segre case.
    pub fn multilinear(dims: Vec<usize>) -> Result<Self> {
        let degrees = vec![1; dims.len()];
        Self::new(dims, degrees)
    }

    /// Parses the literal `dims=2,2,2,2 degrees=1,1,1,1`; `degrees` may be omitted.
    pub fn parse(s: &str) -> Result<Self> {
        let mut dims = None;
        let mut degrees = None;
        for part in s.split_whitespace() {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            let list = parse_usize_list(value)?;
            match key {
                "dims" => dims = Some(list),
                "degrees" => degrees = Some(list),
                _ => return Err(Error::Parse(format!("unknown format key `{key}`"))),
            }
        }
        let dims = dims.ok_or_else(|| Error::Parse("missing dims".into()))?;
        let degrees = degrees.unwrap_or_else(|| vec![1; dims.len()]);
        Self::new(dims, degrees)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn is_multilinear(&self) -> bool {
        self.degrees.iter().all(|&d| d == 1)
    }

    /// `N = Π C(n_i + d_i − 1, d_i)`.
    pub fn ambient_dimension(&self) -> usize {
        self.ambient
    }

    /// Number of coordinates of factor `i` alone, `C(n_i + d_i − 1, d_i)`.
    pub fn factor_size(&self, i: usize) -> usize {
        self.multisets[i].len()
    }

    /// Sorted 0-based index multiset of the `local`-th coordinate of factor `i`.
    pub fn factor_multiset(&self, i: usize, local: usize) -> &[u32] {
        &self.multisets[i][local]
    }

    /// Local index of a factor multiset given as an exponent vector.
    pub fn factor_index_of_exponents(&self, i: usize, exps: &[u32]) -> Option<usize> {
        self.lookup[i].get(exps).copied()
    }

    /// Splits a global coordinate into per-factor local indices.
    pub fn split_index(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.strides
            .iter()
            .map(|stride| {
                let local = rest / stride;
                rest %= stride;
                local
            })
            .collect()
    }

    pub fn join_index(&self, locals: &[usize]) -> usize {
        locals.iter().zip(&self.strides).map(|(l, s)| l * s).sum()
    }

    pub fn coord(&self, index: usize) -> CoordIndex {
        let exponents = self
            .split_index(index)
            .into_iter()
            .enumerate()
            .map(|(i, local)| exponent_vector(&self.multisets[i][local], self.dims[i]))
            .collect();
        CoordIndex { exponents }
    }

    pub fn index_of(&self, coord: &CoordIndex) -> Option<usize> {
        if coord.exponents.len() != self.dims.len() {
            return None;
        }
        let mut locals = Vec::with_capacity(self.dims.len());
        for (i, exps) in coord.exponents.iter().enumerate() {
            locals.push(self.factor_index_of_exponents(i, exps)?);
        }
        Some(self.join_index(&locals))
    }

    /// Width of a flattened marginal vector, `Σ n_i`.
    pub fn marginal_width(&self) -> usize {
        self.marginals.len() / self.ambient.max(1)
    }

    /// Flattened marginals of one coordinate (factor blocks concatenated).
    pub fn coord_marginal(&self, index: usize) -> &[u32] {
        let w = self.marginal_width();
        &self.marginals[index * w..(index + 1) * w]
    }

    pub fn marginal_offset(&self, factor: usize) -> usize {
        self.marg_offsets[factor]
    }

    /// Groups of factor positions sharing both dimension and degree.
    pub fn interchangeable_factors(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.dims.len() {
            match groups
                .iter_mut()
                .find(|g| self.dims[g[0]] == self.dims[i] && self.degrees[g[0]] == self.degrees[i])
            {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        groups
    }

    /// Formats a coordinate as `t[1,2|1|3]`.
    pub fn coord_label(&self, index: usize) -> String {
        let parts: Vec<String> = self
            .split_index(index)
            .into_iter()
            .enumerate()
            .map(|(i, local)| {
                self.multisets[i][local]
                    .iter()
                    .map(|a| (a + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        format!("t[{}]", parts.join("|"))
    }

    /// Parses the body of a coordinate label, i.e. the text between `t[` and `]`.
    pub fn parse_coord_body(&self, body: &str) -> Result<usize> {
        let parts: Vec<&str> = body.split('|').collect();
        if parts.len() != self.dims.len() {
            return Err(Error::Parse(format!(
                "coordinate `t[{body}]` has {} factors, format has {}",
                parts.len(),
                self.dims.len()
            )));
        }
        let mut locals = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let mut exps = vec![0u32; self.dims[i]];
            let mut count = 0;
            for tok in part.split(',') {
                let a: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index `{tok}` in `t[{body}]`")))?;
                if a == 0 || a > self.dims[i] {
                    return Err(Error::Parse(format!("index {a} out of range in `t[{body}]`")));
                }
                exps[a - 1] += 1;
                count += 1;
            }
            if count != self.degrees[i] {
                return Err(Error::Parse(format!(
                    "factor {} of `t[{body}]` has {count} indices, expected {}",
                    i + 1,
                    self.degrees[i]
                )));
            }
            locals.push(self.factor_index_of_exponents(i, &exps).expect("valid multiset"));
        }
        Ok(self.join_index(&locals))
    }
}

impl fmt::Display for TensorFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "dims={} degrees={}", list(&self.dims), list(&self.degrees))
    }
}

pub(crate) fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer `{t}` in list `{s}`")))
        })
        .collect()
}

/// Per-factor exponent vectors of one ambient coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordIndex {
    pub exponents: Vec<Vec<u32>>,
}

pub(crate) fn exponent_vector(multiset: &[u32], n: usize) -> Vec<u32> {
    let mut exps = vec![0u32; n];
    for &a in multiset {
        exps[a as usize] += 1;
    }
    exps
}

/// Sorted multisets of size `d` over `0..n`, lexicographic order.
pub(crate) fn multisets_of(n: u32, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    loop {
        out.push(cur.clone());
        // next nondecreasing sequence
        let mut pos = d;
        while pos > 0 && cur[pos - 1] == n - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        let v = cur[pos - 1] + 1;
        for x in &mut cur[pos - 1..] {
            *x = v;
        }
    }
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// `d! / Π a_j!` for an exponent vector summing to `d`.
pub fn multinomial(exps: &[u32]) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for &e in exps {
        for j in 1..=e as u128 {
            total += 1;
            acc = acc * total / j;
        }
    }
    acc
}

pub fn ambient_dimension(format: &TensorFormat) -> usize {
    format.ambient_dimension()
}

/// A monomial in the ambient coordinates, stored as the sorted list of its
/// variables with repetition. The derived order (lexicographic on that list)
/// is the fixed monomial order used throughout: for equal degrees, `x0^2`
/// precedes `x0*x1`, which precedes `x1^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(SmallVec<[u32; 10]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: usize) -> Self {
        let mut s = SmallVec::new();
        s.push(v as u32);
        Monomial(s)
    }

    pub fn from_vars(mut vars: Vec<u32>) -> Self {
        vars.sort_unstable();
        Monomial(SmallVec::from_vec(vars))
    }

    pub fn from_exponents<I: IntoIterator<Item = (usize, u32)>>(exps: I) -> Self {
        let mut vars = Vec::new();
        for (v, e) in exps {
            vars.extend(std::iter::repeat_n(v as u32, e as usize));
        }
        Self::from_vars(vars)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// `(variable, exponent)` pairs in increasing variable order.
    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        let vars = &self.0;
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= vars.len() {
                return None;
            }
            let v = vars[i];
            let start = i;
            while i < vars.len() && vars[i] == v {
                i += 1;
            }
            Some((v as usize, (i - start) as u32))
        })
    }

    pub fn exponent_of(&self, v: usize) -> u32 {
        self.0.iter().filter(|&&x| x as usize == v).count() as u32
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn times_var(&self, v: usize) -> Monomial {
        let v = v as u32;
        let pos = self.0.partition_point(|&x| x <= v);
        let mut out = self.0.clone();
        out.insert(pos, v);
        Monomial(out)
    }

    /// Removes one copy of `v`; `None` if `v` does not divide.
    pub fn without_var(&self, v: usize) -> Option<Monomial> {
        let v = v as u32;
        let pos = self.0.iter().position(|&x| x == v)?;
        let mut out = self.0.clone();
        out.remove(pos);
        Some(Monomial(out))
    }

    /// `self / other` if `other` divides `self`.
    pub fn divide(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len().saturating_sub(other.0.len()));
        let mut j = 0;
        for &x in &self.0 {
            if j < other.0.len() && other.0[j] == x {
                j += 1;
            } else if j < other.0.len() && other.0[j] < x {
                return None;
            } else {
                out.push(x);
            }
        }
        (j == other.0.len()).then_some(Monomial(out))
    }

    /// Applies a coordinate relabeling.
    pub fn map_vars(&self, f: impl Fn(u32) -> u32) -> Monomial {
        let mut out: SmallVec<[u32; 10]> = self.0.iter().map(|&x| f(x)).collect();
        out.sort_unstable();
        Monomial(out)
    }

    pub fn label(&self, format: &TensorFormat) -> String {
        if self.is_one() {
            return "1".into();
        }
        self.exponents()
            .map(|(v, e)| {
                let c = format.coord_label(v);
                if e == 1 {
                    c
                } else {
                    format!("{c}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Parses `t[..]^e*t[..]` (or `1`).
    pub fn parse(s: &str, format: &TensorFormat) -> Result<Monomial> {
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::one());
        }
        let mut vars = Vec::new();
        for factor in s.split('*') {
            let factor = factor.trim();
            let (coord, exp) = match factor.rsplit_once('^') {
                Some((c, e)) if c.ends_with(']') => (
                    c,
                    e.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                ),
                _ => (factor, 1),
            };
            let body = coord
                .strip_prefix("t[")
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("bad coordinate `{coord}`")))?;
            let v = format.parse_coord_body(body)?;
            vars.extend(std::iter::repeat_n(v as u32, exp as usize));
        }
        Ok(Monomial::from_vars(vars))
    }
}

/// Per-factor index marginals of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeightVector {
    pub marginals: Vec<Vec<i64>>,
}

impl WeightVector {
    pub fn zero(format: &TensorFormat) -> Self {
        WeightVector {
            marginals: format.dims().iter().map(|&n| vec![0; n]).collect(),
        }
    }

    pub fn add(&self, other: &WeightVector) -> WeightVector {
        WeightVector {
            marginals: self
                .marginals
                .iter()
                .zip(&other.marginals)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }
}

pub fn weight(m: &Monomial, format: &TensorFormat) -> WeightVector {
    let mut w = WeightVector::zero(format);
    let width = format.marginal_width();
    let mut flat = vec![0i64; width];
    for (v, e) in m.exponents() {
        for (acc, &x) in flat.iter_mut().zip(format.coord_marginal(v)) {
            *acc += x as i64 * e as i64;
        }
    }
    for (i, marg) in w.marginals.iter_mut().enumerate() {
        let off = format.marginal_offset(i);
        let len = marg.len();
        marg.copy_from_slice(&flat[off..off + len]);
    }
    w
}

/// Flattened weight, cheaper to hash than a [`WeightVector`].
pub(crate) fn flat_weight(m: &Monomial, format: &TensorFormat) -> Vec<u32> {
    let mut flat = vec![0u32; format.marginal_width()];
    for &v in m.vars() {
        for (acc, &x) in flat.iter_mut().zip(format.coord_marginal(v as usize)) {
            *acc += x;
        }
    }
    flat
}

/// Per-factor marginal target `δ·d_i/n_i`, or `None` on a divisibility obstruction.
fn weight_zero_targets(format: &TensorFormat, delta: usize) -> Option<Vec<u32>> {
    format
        .dims()
        .iter()
        .zip(format.degrees())
        .map(|(&n, &d)| (delta * d).is_multiple_of(n).then_some((delta * d / n) as u32))
        .collect()
}

pub fn is_weight_zero(m: &Monomial, format: &TensorFormat) -> bool {
    let Some(targets) = weight_zero_targets(format, m.degree()) else {
        return false;
    };
    let flat = flat_weight(m, format);
    (0..format.num_factors()).all(|i| {
        let off = format.marginal_offset(i);
        flat[off..off + format.dims()[i]].iter().all(|&x| x == targets[i])
    })
}

/// Number of degree-`delta` monomials in `n` variables, `C(n + δ − 1, δ)`.
pub fn monomial_count(n: usize, delta: usize) -> u128 {
    if n == 0 {
        return u128::from(delta == 0);
    }
    binomial((n + delta - 1) as u128, delta as u128)
}

/// All degree-`delta` monomials in `n` variables, in the fixed monomial order.
pub fn enumerate_monomials_in(n: usize, delta: usize, cap: u128) -> Result<Vec<Monomial>> {
    let count = monomial_count(n, delta);
    if count > cap {
        return Err(Error::CapExceeded {
            what: "monomial enumeration",
            required: count,
            cap,
            report: format!("degree {delta} in {n} variables"),
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    if delta == 0 {
        out.push(Monomial::one());
        return Ok(out);
    }
    if n == 0 {
        return Ok(out);
    }
    let mut cur = vec![0u32; delta];
    loop {
        out.push(Monomial(SmallVec::from_slice(&cur)));
        let mut pos = delta;
        while pos > 0 && cur[pos - 1] as usize == n - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return Ok(out);
        }
        let v = cur[pos - 1] + 1;
        for x in &mut cur[pos - 1..] {
            *x = v;
        }
    }
}

pub fn enumerate_monomials(format: &TensorFormat, delta: usize, cap: u128) -> Result<Vec<Monomial>> {
    enumerate_monomials_in(format.ambient_dimension(), delta, cap)
}

/// Streams the weight-zero monomials of degree `delta` in the fixed monomial
/// order, by backtracking over nondecreasing variable sequences with marginal
/// pruning. The full monomial basis is never materialized.
pub fn for_each_weight_zero(format: &TensorFormat, delta: usize, mut visit: impl FnMut(&Monomial)) {
    let Some(targets) = weight_zero_targets(format, delta) else {
        return;
    };
    if delta == 0 {
        visit(&Monomial::one());
        return;
    }
    let n = format.ambient_dimension();
    let width = format.marginal_width();
    let mut target_flat = vec![0u32; width];
    for i in 0..format.num_factors() {
        let off = format.marginal_offset(i);
        target_flat[off..off + format.dims()[i]].fill(targets[i]);
    }
    // last coordinate whose marginal touches each slot
    let mut last_touch = vec![0usize; width];
    for c in 0..n {
        for (slot, &x) in format.coord_marginal(c).iter().enumerate() {
            if x > 0 {
                last_touch[slot] = c;
            }
        }
    }
    let mut state = WzState {
        format,
        n,
        target: target_flat,
        last_touch,
        counts: vec![0u32; width],
        stack: Vec::with_capacity(delta),
    };
    state.recurse(0, delta, &mut visit);
}

struct WzState<'a> {
    format: &'a TensorFormat,
    n: usize,
    target: Vec<u32>,
    last_touch: Vec<usize>,
    counts: Vec<u32>,
    stack: Vec<u32>,
}

impl WzState<'_> {
    fn recurse(&mut self, start: usize, left: usize, visit: &mut impl FnMut(&Monomial)) {
        if left == 0 {
            visit(&Monomial(SmallVec::from_slice(&self.stack)));
            return;
        }
        for c in start..self.n {
            // a deficit that no remaining coordinate can fill ends the branch
            if self
                .counts
                .iter()
                .zip(&self.target)
                .zip(&self.last_touch)
                .any(|((&have, &want), &last)| have < want && last < c)
            {
                return;
            }
            let marg = self.format.coord_marginal(c);
            if marg
                .iter()
                .zip(&self.counts)
                .zip(&self.target)
                .any(|((&x, &have), &want)| have + x > want)
            {
                continue;
            }
            for (acc, &x) in self.counts.iter_mut().zip(marg) {
                *acc += x;
            }
            self.stack.push(c as u32);
            self.recurse(c, left - 1, visit);
            self.stack.pop();
            for (acc, &x) in self.counts.iter_mut().zip(marg) {
                *acc -= x;
            }
        }
    }
}

pub fn enumerate_weight_zero(format: &TensorFormat, delta: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for_each_weight_zero(format, delta, |m| out.push(m.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmt(dims: &[usize], degrees: &[usize]) -> TensorFormat {
        TensorFormat::new(dims.to_vec(), degrees.to_vec()).unwrap()
    }

    fn mono(format: &TensorFormat, s: &str) -> Monomial {
        Monomial::parse(s, format).unwrap()
    }

    #[test]
    fn ambient_dimensions() {
        assert_eq!(fmt(&[2, 2, 2, 2], &[1, 1, 1, 1]).ambient_dimension(), 16);
        assert_eq!(fmt(&[3], &[3]).ambient_dimension(), 10);
        assert_eq!(fmt(&[2, 3], &[2, 1]).ambient_dimension(), 9);
    }

    #[test]
    fn invalid_formats_rejected() {
        assert!(TensorFormat::new(vec![], vec![]).is_err());
        assert!(TensorFormat::new(vec![2, 0], vec![1, 1]).is_err());
        assert!(TensorFormat::new(vec![2], vec![0]).is_err());
        assert!(TensorFormat::new(vec![2, 2], vec![1]).is_err());
    }

    #[test]
    fn parse_format_literal() {
        let f = TensorFormat::parse("dims=2,2,2,2 degrees=1,1,1,1").unwrap();
        assert_eq!(f.dims(), &[2, 2, 2, 2]);
        assert_eq!(f.to_string(), "dims=2,2,2,2 degrees=1,1,1,1");
        let g = TensorFormat::parse("dims=3").unwrap();
        assert_eq!(g.degrees(), &[1]);
        assert!(TensorFormat::parse("dims=3 colour=1").is_err());
    }

    #[test]
    fn coordinate_bijection_round_trips() {
        for f in [
            fmt(&[2, 2, 2, 2, 2], &[1; 5]),
            fmt(&[3], &[3]),
            fmt(&[2, 3], &[2, 1]),
            fmt(&[3, 4, 2], &[2, 1, 3]),
            fmt(&[5, 5], &[3, 2]),
        ] {
            for i in 0..f.ambient_dimension() {
                let c = f.coord(i);
                assert_eq!(f.index_of(&c), Some(i));
                let label = f.coord_label(i);
                let body = &label[2..label.len() - 1];
                assert_eq!(f.parse_coord_body(body).unwrap(), i);
            }
        }
    }

    #[test]
    fn matrix_coordinates_are_row_major() {
        let f = fmt(&[3, 3], &[1, 1]);
        assert_eq!(f.coord_label(0), "t[1|1]");
        assert_eq!(f.coord_label(1), "t[1|2]");
        assert_eq!(f.coord_label(3), "t[2|1]");
        let cubic = fmt(&[3], &[3]);
        let labels: Vec<String> = (0..4).map(|i| cubic.coord_label(i)).collect();
        assert_eq!(labels, ["t[1,1,1]", "t[1,1,2]", "t[1,1,3]", "t[1,2,2]"]);
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(enumerate_monomials_in(4, 3, DEFAULT_MONOMIAL_CAP).unwrap().len(), 20);
        assert_eq!(enumerate_monomials_in(16, 3, DEFAULT_MONOMIAL_CAP).unwrap().len(), 816);
        let constant = enumerate_monomials_in(7, 0, DEFAULT_MONOMIAL_CAP).unwrap();
        assert_eq!(constant, vec![Monomial::one()]);
        let list = enumerate_monomials_in(5, 3, DEFAULT_MONOMIAL_CAP).unwrap();
        assert!(list.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn monomial_cap_enforced() {
        let err = enumerate_monomials_in(27, 9, DEFAULT_MONOMIAL_CAP).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn weight_examples() {
        let f = fmt(&[3, 3], &[1, 1]);
        let w = weight(&mono(&f, "t[1|2]"), &f);
        assert_eq!(w.marginals, vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let w = weight(&mono(&f, "t[1|3]*t[2|1]"), &f);
        assert_eq!(w.marginals, vec![vec![1, 1, 0], vec![1, 0, 1]]);
        // reduced SL weight: (row1-row3, row2-row3, col1-col3, col2-col3)
        let reduced: Vec<i64> = w
            .marginals
            .iter()
            .flat_map(|m| vec![m[0] - m[2], m[1] - m[2]])
            .collect();
        assert_eq!(reduced, vec![1, 1, 0, -1]);
        assert_eq!(weight(&Monomial::one(), &f), WeightVector::zero(&f));
    }

    #[test]
    fn weight_zero_tests() {
        let f = fmt(&[3, 3], &[1, 1]);
        assert!(is_weight_zero(&mono(&f, "t[1|1]*t[2|2]*t[3|3]"), &f));
        assert!(!is_weight_zero(&mono(&f, "t[1|1]*t[1|2]*t[3|3]"), &f));
        // 3 ∤ 2
        assert!(!is_weight_zero(&mono(&f, "t[1|1]*t[2|2]"), &f));
    }

    #[test]
    fn weight_zero_enumeration() {
        let f = fmt(&[3, 3], &[1, 1]);
        assert_eq!(enumerate_weight_zero(&f, 3).len(), 6);
        let m2 = fmt(&[2, 2], &[1, 1]);
        let got = enumerate_weight_zero(&m2, 2);
        let want = vec![mono(&m2, "t[1|1]*t[2|2]"), mono(&m2, "t[1|2]*t[2|1]")];
        assert_eq!(got, want);
        assert!(enumerate_weight_zero(&m2, 1).is_empty());
    }

    #[test]
    fn weight_zero_matches_filter() {
        for (f, delta) in [
            (fmt(&[2, 2, 2], &[1, 1, 1]), 4),
            (fmt(&[3], &[3]), 4),
            (fmt(&[2, 3], &[1, 1]), 6),
            (fmt(&[2], &[2]), 3),
            (fmt(&[3, 3], &[1, 1]), 6),
        ] {
            let all = enumerate_monomials(&f, delta, DEFAULT_MONOMIAL_CAP).unwrap();
            let filtered: Vec<Monomial> = all.into_iter().filter(|m| is_weight_zero(m, &f)).collect();
            assert_eq!(enumerate_weight_zero(&f, delta), filtered, "{f} degree {delta}");
        }
    }

    #[test]
    fn monomial_arithmetic() {
        let a = Monomial::from_vars(vec![3, 1, 1]);
        let b = Monomial::from_vars(vec![2, 1]);
        let ab = a.mul(&b);
        assert_eq!(ab.vars(), &[1, 1, 1, 2, 3]);
        assert_eq!(ab.divide(&a), Some(b.clone()));
        assert_eq!(a.divide(&b), None);
        assert_eq!(a.exponents().collect::<Vec<_>>(), vec![(1, 2), (3, 1)]);
        assert_eq!(a.without_var(1).unwrap().vars(), &[1, 3]);
        assert_eq!(a.times_var(2).vars(), &[1, 1, 2, 3]);
        assert_eq!(Monomial::from_exponents([(4, 2), (0, 1)]).vars(), &[0, 4, 4]);
    }

    #[test]
    fn monomial_text_round_trip() {
        let f = fmt(&[2, 3], &[2, 1]);
        let m = Monomial::from_vars(vec![0, 0, 4, 8]);
        let s = m.label(&f);
        assert_eq!(Monomial::parse(&s, &f).unwrap(), m);
        assert_eq!(Monomial::parse("1", &f).unwrap(), Monomial::one());
        assert!(Monomial::parse("t[1|1]", &f).is_err());
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[1, 1, 1]), 6);
        assert_eq!(multinomial(&[2, 1]), 3);
        assert_eq!(multinomial(&[3]), 1);
        assert_eq!(binomial(18, 3), 816);
    }

    #[test]
    fn interchangeable_groups() {
        let f = fmt(&[2, 3, 2, 3], &[1, 1, 1, 2]);
        assert_eq!(f.interchangeable_factors(), vec![vec![0, 2], vec![1], vec![3]]);
    }
}
