//! Bipartitions of the factor set, separating collections and the bound
//! `s(n)`, set-partition meets and predicted preserver descriptors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::binomial;

/// A bipartition `{I, J}` of `[k]`, stored as the bitmask of `I`.
/// Normalized so that factor 0 lies in `I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bipartition {
    k: usize,
    mask: u64,
}

impl Bipartition {
    /// `side` lists the (0-based) factors of one side; either side may be given.
    pub fn new(k: usize, side: &[usize]) -> Result<Self> {
        if !(2..=63).contains(&k) {
            return Err(Error::InvalidFormat(format!("bipartitions need 2 ≤ k ≤ 63, got {k}")));
        }
        let mut mask = 0u64;
        for &i in side {
            if i >= k {
                return Err(Error::InvalidFormat(format!("factor {} out of range for k = {k}", i + 1)));
            }
            mask |= 1 << i;
        }
        Self::from_mask(k, mask)
    }

    pub fn from_mask(k: usize, mask: u64) -> Result<Self> {
        let full = (1u64 << k) - 1;
        let mask = mask & full;
        let mask = if mask & 1 == 0 { full ^ mask } else { mask };
        if mask == full {
            return Err(Error::InvalidFormat("both sides of a bipartition must be nonempty".into()));
        }
        Ok(Bipartition { k, mask })
    }

    /// Parses `12|34` (1-based factor digits) or `1,2|3,4`.
    pub fn parse(s: &str, k: usize) -> Result<Self> {
        let (left, right) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("bipartition `{s}` lacks `|`")))?;
        let side = |t: &str| -> Result<Vec<usize>> {
            let items: Vec<&str> = if t.contains(',') {
                t.split(',').map(str::trim).collect()
            } else {
                t.trim().split("").filter(|c| !c.is_empty()).collect()
            };
            items
                .into_iter()
                .map(|c| match c.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n - 1),
                    _ => Err(Error::Parse(format!("bad factor `{c}` in `{s}`"))),
                })
                .collect()
        };
        let (l, r) = (side(left)?, side(right)?);
        let b = Bipartition::new(k, &l)?;
        let other = Bipartition::new(k, &r)?;
        if b != other || l.len() + r.len() != k {
            return Err(Error::Parse(format!("`{s}` is not a bipartition of [{k}]")));
        }
        Ok(b)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn left(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| self.contains(i)).collect()
    }

    pub fn right(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| !self.contains(i)).collect()
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.contains(i) != self.contains(j)
    }

    /// `min(∏_I n_i, ∏_J n_j)`.
    pub fn value(&self, dims: &[usize]) -> u128 {
        let prod = |s: Vec<usize>| s.iter().map(|&i| dims[i] as u128).product::<u128>();
        prod(self.left()).min(prod(self.right()))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: Vec<usize>| {
            let sep = if self.k > 9 { "," } else { "" };
            v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(sep)
        };
        write!(f, "{}|{}", side(self.left()), side(self.right()))
    }
}

impl Serialize for Bipartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// All `2^{k−1} − 1` bipartitions of `[k]`, ordered by mask.
pub fn all_bipartitions(k: usize) -> Result<Vec<Bipartition>> {
    if !(2..=63).contains(&k) {
        return Err(Error::InvalidFormat(format!("bipartitions need 2 ≤ k ≤ 63, got {k}")));
    }
    Ok((0..1u64 << (k - 1))
        .map(|half| (half << 1) | 1)
        .filter(|&m| m != (1 << k) - 1)
        .map(|mask| Bipartition { k, mask })
        .collect())
}

/// The `k` bipartitions `{i} | rest`.
pub fn singleton_bipartitions(k: usize) -> Result<Vec<Bipartition>> {
    (0..k).map(|i| Bipartition::new(k, &[i])).collect()
}

pub fn is_separating(collection: &[Bipartition], k: usize) -> bool {
    (0..k).all(|i| (i + 1..k).all(|j| collection.iter().any(|b| b.separates(i, j))))
}

/// Result of the `s(n)` computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub dims: Vec<usize>,
    pub s: u128,
    /// A separating collection whose smallest value is `s`.
    pub witness: Vec<Bipartition>,
}

impl BoundReport {
    /// Largest secant rank with a guaranteed expected preserver, `s − 1`.
    pub fn guaranteed_r_max(&self) -> u128 {
        self.s - 1
    }
}

/// `s(n)` by threshold descent over the distinct bipartition values.
pub fn s_of_n(dims: &[usize]) -> Result<BoundReport> {
    let k = dims.len();
    if k < 2 {
        return Err(Error::InvalidFormat("s(n) needs at least two factors".into()));
    }
    if let Some(&bad) = dims.iter().find(|&&n| n == 0) {
        return Err(Error::InvalidFormat(format!("dimension {bad} must be positive")));
    }
    let all = all_bipartitions(k)?;
    let mut values: Vec<u128> = all.iter().map(|b| b.value(dims)).collect();
    values.sort_unstable();
    values.dedup();
    for &t in values.iter().rev() {
        let family: Vec<Bipartition> = all.iter().copied().filter(|b| b.value(dims) >= t).collect();
        if is_separating(&family, k) {
            return Ok(BoundReport {
                dims: dims.to_vec(),
                s: t,
                witness: prune_separating(family, k),
            });
        }
    }
    unreachable!("the singleton bipartitions always separate")
}

/// Drops members greedily while the collection stays separating.
fn prune_separating(mut family: Vec<Bipartition>, k: usize) -> Vec<Bipartition> {
    let mut i = 0;
    while i < family.len() {
        let b = family.remove(i);
        if !is_separating(&family, k) {
            family.insert(i, b);
            i += 1;
        }
    }
    family
}

/// A set partition of `[k]`; blocks sorted, each block sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let k: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; k];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidFormat("empty block in set partition".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= k || seen[i] {
                    return Err(Error::InvalidFormat("blocks must partition [k]".into()));
                }
                seen[i] = true;
            }
        }
        blocks.sort();
        Ok(SetPartition { blocks })
    }

    pub fn k(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Common refinement `{Q_i ∩ R_j}`.
    pub fn meet(&self, other: &SetPartition) -> SetPartition {
        let mut blocks = Vec::new();
        for q in &self.blocks {
            for r in &other.blocks {
                let inter: Vec<usize> = q.iter().copied().filter(|i| r.contains(i)).collect();
                if !inter.is_empty() {
                    blocks.push(inter);
                }
            }
        }
        blocks.sort();
        SetPartition { blocks }
    }

    pub fn merged_dims(&self, dims: &[usize]) -> Vec<usize> {
        self.blocks.iter().map(|b| b.iter().map(|&i| dims[i]).product()).collect()
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl From<&Bipartition> for SetPartition {
    fn from(b: &Bipartition) -> Self {
        SetPartition {
            blocks: vec![b.left(), b.right()],
        }
    }
}

/// `∩B`: iterated common refinement of the members.
pub fn set_partition_meet(collection: &[Bipartition]) -> Result<SetPartition> {
    let first = collection
        .first()
        .ok_or_else(|| Error::InvalidFormat("meet of an empty collection".into()))?;
    if collection.iter().any(|b| b.k() != first.k()) {
        return Err(Error::InvalidFormat("bipartitions of different sets".into()));
    }
    Ok(collection
        .iter()
        .skip(1)
        .fold(SetPartition::from(first), |acc, b| acc.meet(&SetPartition::from(b))))
}

/// All set partitions of `[k]`, finest first (more blocks first, then lexicographic).
pub fn set_partitions(k: usize) -> Vec<SetPartition> {
    fn go(i: usize, k: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<SetPartition>) {
        if i == k {
            out.push(SetPartition { blocks: blocks.clone() });
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            go(i + 1, k, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        go(i + 1, k, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, k, &mut Vec::new(), &mut out);
    for p in &mut out {
        p.blocks.sort();
    }
    out.sort_by(|a, b| b.blocks.len().cmp(&a.blocks.len()).then_with(|| a.cmp(b)));
    out
}

/// `Σ (n_i² − 1) + 1`.
pub fn expected_preserver_dim(dims: &[usize]) -> usize {
    dims.iter().map(|&n| n * n - 1).sum::<usize>() + 1
}

/// Predicted preserver of the variety of tensors of partition rank one for `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreserverDescriptor {
    pub blocks: SetPartition,
    pub merged_dims: Vec<usize>,
    pub lie_dim: usize,
    /// Order of the block-permutation component group.
    pub component_order: u128,
    pub group: String,
}

pub fn predicted_partition_preserver(collection: &[Bipartition], dims: &[usize]) -> Result<PreserverDescriptor> {
    let blocks = set_partition_meet(collection)?;
    if blocks.k() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: blocks.k(),
            found: dims.len(),
        });
    }
    let merged_dims = blocks.merged_dims(dims);
    // blocks are interchangeable when their dimension multisets agree
    let mut classes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for b in &blocks.blocks {
        let mut key: Vec<usize> = b.iter().map(|&i| dims[i]).collect();
        key.sort_unstable();
        *classes.entry(key).or_default() += 1;
    }
    let component_order = classes.values().map(|&c| factorial(c)).product();
    let factors: Vec<String> = blocks
        .blocks
        .iter()
        .map(|b| b.iter().map(|i| format!("V{}", i + 1)).collect::<Vec<_>>().join("⊗"))
        .collect();
    let perms: Vec<String> = classes.values().filter(|&&c| c > 1).map(|c| format!("S{c}")).collect();
    let mut group = format!("G({})", factors.join(", "));
    if !perms.is_empty() {
        group.push_str(&format!(" ⋊ ({})", perms.join(" × ")));
    }
    Ok(PreserverDescriptor {
        lie_dim: expected_preserver_dim(&merged_dims),
        blocks,
        merged_dims,
        component_order,
        group,
    })
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Checks, for every factor `i`, that `d_i ≥ 2` or `r_i ≤ ∏_{j≠i} C(r_j + d_j − 1, d_j)`.
pub fn is_nonredundant(dims: &[usize], degrees: &[usize], ranks: &[usize]) -> Result<bool> {
    if dims.len() != degrees.len() || dims.len() != ranks.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: ranks.len(),
        });
    }
    if let Some(i) = (0..dims.len()).find(|&i| ranks[i] > dims[i] || ranks[i] == 0) {
        return Err(Error::InvalidFormat(format!(
            "rank {} of factor {} must lie in 1..={}",
            ranks[i],
            i + 1,
            dims[i]
        )));
    }
    Ok((0..dims.len()).all(|i| {
        degrees[i] >= 2
            || ranks[i] as u128
                <= (0..dims.len())
                    .filter(|&j| j != i)
                    .map(|j| binomial((ranks[j] + degrees[j] - 1) as u128, degrees[j] as u128))
                    .product::<u128>()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(s: &str, k: usize) -> Bipartition {
        Bipartition::parse(s, k).unwrap()
    }

    /// Exhaustive maximum over every nonempty separating collection.
    fn brute_s(dims: &[usize]) -> u128 {
        let all = all_bipartitions(dims.len()).unwrap();
        let mut best = 0;
        for subset in 1u64..1 << all.len() {
            let coll: Vec<Bipartition> = (0..all.len()).filter(|&i| subset >> i & 1 == 1).map(|i| all[i]).collect();
            if is_separating(&coll, dims.len()) {
                best = best.max(coll.iter().map(|b| b.value(dims)).min().unwrap());
            }
        }
        best
    }

    #[test]
    fn bipartition_counts() {
        assert_eq!(all_bipartitions(2).unwrap().len(), 1);
        assert_eq!(all_bipartitions(3).unwrap().len(), 3);
        assert_eq!(all_bipartitions(4).unwrap().len(), 7);
        assert!(all_bipartitions(1).is_err());
        for b in all_bipartitions(5).unwrap() {
            assert!(b.contains(0));
        }
    }

    #[test]
    fn bipartition_text() {
        let b = bp("34|12", 4);
        assert_eq!(b.to_string(), "12|34");
        assert_eq!(bp("1,2|3,4", 4), b);
        assert!(Bipartition::parse("12|23", 4).is_err());
        assert!(Bipartition::parse("12|3", 4).is_err());
        assert!(Bipartition::new(3, &[]).is_err());
    }

    #[test]
    fn separating_examples() {
        assert!(is_separating(&[bp("12|34", 4), bp("13|24", 4)], 4));
        assert!(!is_separating(&[bp("12|34", 4)], 4));
        assert!(is_separating(&singleton_bipartitions(5).unwrap(), 5));
    }

    #[test]
    fn bound_examples_match_brute_force() {
        for (dims, s) in [
            (vec![2, 2, 2], 2),
            (vec![2, 2, 2, 2], 4),
            (vec![2, 3, 4], 3),
            (vec![3, 3, 3, 3], 9),
        ] {
            let report = s_of_n(&dims).unwrap();
            assert_eq!(report.s, s, "{dims:?}");
            assert_eq!(brute_s(&dims), s, "{dims:?}");
            assert!(is_separating(&report.witness, dims.len()));
            assert_eq!(report.witness.iter().map(|b| b.value(&dims)).min(), Some(s));
        }
        let r = s_of_n(&[2, 2, 2, 2]).unwrap();
        assert_eq!(r.guaranteed_r_max(), 3);
        assert_eq!(r.witness.len(), 2);
    }

    #[test]
    fn bound_exhaustive_small_k() {
        for k in 2..=4 {
            let mut dims = vec![1; k];
            loop {
                assert_eq!(s_of_n(&dims).unwrap().s, brute_s(&dims), "{dims:?}");
                let mut i = 0;
                while i < k && dims[i] == 4 {
                    dims[i] = 1;
                    i += 1;
                }
                if i == k {
                    break;
                }
                dims[i] += 1;
            }
        }
    }

    #[test]
    fn bound_random_collections_never_exceed() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for k in [5usize, 6] {
            let all = all_bipartitions(k).unwrap();
            for _ in 0..10_000 {
                let dims: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
                let s = s_of_n(&dims).unwrap().s;
                let coll: Vec<Bipartition> = all.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
                if !coll.is_empty() && is_separating(&coll, k) {
                    assert!(coll.iter().map(|b| b.value(&dims)).min().unwrap() <= s);
                }
            }
        }
    }

    #[test]
    fn bound_of_cubes() {
        for n in [2usize, 3] {
            for k in 2..=6 {
                assert_eq!(s_of_n(&vec![n; k]).unwrap().s, (n as u128).pow(k as u32 / 2));
            }
        }
    }

    #[test]
    fn bound_is_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let k = rng.gen_range(2..=5);
            let dims: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
            let mut bigger = dims.clone();
            bigger[rng.gen_range(0..k)] += 1;
            assert!(s_of_n(&bigger).unwrap().s >= s_of_n(&dims).unwrap().s);
        }
    }

    #[test]
    fn meets() {
        let single = set_partition_meet(&singleton_bipartitions(3).unwrap()).unwrap();
        assert_eq!(single.blocks, vec![vec![0], vec![1], vec![2]]);
        let one = set_partition_meet(&[bp("12|34", 4)]).unwrap();
        assert_eq!(one.blocks, vec![vec![0, 1], vec![2, 3]]);
        assert!(set_partition_meet(&[bp("12|34", 4), bp("13|24", 4)]).unwrap().is_discrete());
        assert!(set_partition_meet(&[]).is_err());
    }

    #[test]
    fn separating_iff_discrete_meet() {
        for k in 2..=5 {
            let all = all_bipartitions(k).unwrap();
            for subset in 1u64..1 << all.len() {
                let coll: Vec<Bipartition> =
                    (0..all.len()).filter(|&i| subset >> i & 1 == 1).map(|i| all[i]).collect();
                assert_eq!(is_separating(&coll, k), set_partition_meet(&coll).unwrap().is_discrete());
            }
        }
    }

    #[test]
    fn descriptors() {
        let d = predicted_partition_preserver(&singleton_bipartitions(4).unwrap(), &[2, 2, 3, 3]).unwrap();
        assert_eq!((d.merged_dims.clone(), d.lie_dim, d.component_order), (vec![2, 2, 3, 3], 23, 4));
        let d = predicted_partition_preserver(&[bp("12|34", 4)], &[2, 2, 2, 2]).unwrap();
        assert_eq!((d.merged_dims.clone(), d.lie_dim, d.component_order), (vec![4, 4], 31, 2));
        assert_eq!(d.group, "G(V1⊗V2, V3⊗V4) ⋊ (S2)");
        let d = predicted_partition_preserver(&all_bipartitions(3).unwrap(), &[2, 2, 2]).unwrap();
        assert_eq!((d.merged_dims.clone(), d.lie_dim, d.component_order), (vec![2, 2, 2], 10, 6));
        // block classes by dimension multiset: {2,3} twice
        let d = predicted_partition_preserver(&[bp("13|24", 4)], &[2, 2, 3, 3]).unwrap();
        assert_eq!((d.merged_dims, d.component_order), (vec![6, 6], 2));
        assert_eq!(factorial(d.blocks.blocks.len()) % d.component_order, 0);
    }

    #[test]
    fn nonredundancy() {
        assert!(is_nonredundant(&[2, 2, 4], &[1, 1, 1], &[2, 2, 4]).unwrap());
        assert!(!is_nonredundant(&[2, 2, 5], &[1, 1, 1], &[2, 2, 5]).unwrap());
        assert!(is_nonredundant(&[2, 2, 5], &[2, 2, 2], &[1, 1, 5]).unwrap());
        assert!(is_nonredundant(&[2, 2], &[1, 1], &[3, 1]).is_err());
    }

    #[test]
    fn expected_dims() {
        assert_eq!(expected_preserver_dim(&[2, 2, 2, 2]), 13);
        assert_eq!(expected_preserver_dim(&[3]), 9);
        assert_eq!(expected_preserver_dim(&[4, 5]), 40);
    }

    #[test]
    fn set_partition_enumeration() {
        let parts = set_partitions(4);
        assert_eq!(parts.len(), 15);
        assert!(parts[0].is_discrete());
        assert_eq!(parts.last().unwrap().blocks.len(), 1);
        let three = set_partitions(3);
        assert_eq!(three[1].blocks, vec![vec![0], vec![1, 2]]);
    }
}
