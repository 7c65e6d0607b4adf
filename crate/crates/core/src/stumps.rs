//! Atomic stumps and isomeric classes.
//!
//! Cutting every edge between two internal nodes splits a tree into one
//! atomic stump per internal node: `s(m,n)` is a root carrying `m` leaves
//! and `n` open valencies, each of which was an internal child. The sorted
//! multiset of stumps is the tree's [`StumpSignature`]; trees sharing a
//! signature form an isomeric class, and for scalar non-autonomous problems
//! each class contributes one order condition instead of one per tree.
//!
//! Two routes compute the class counts `n_p`: grouping enumerated trees
//! ([`count_by_enumeration`]) and a dynamic program over stump multisets that
//! never builds a tree ([`count_by_recurrence`]).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::parallel;
use crate::trees::{self, LevelSequences, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StumpError {
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("enumeration budget of {budget:?} exceeded while counting order {order}")]
    BudgetExceeded { order: usize, budget: Duration },
    #[error("order {0} is too large for enumeration (limit 255)")]
    OrderTooLarge(usize),
}

/// `s(m,n)`: a root with `m` leaf children and `n` vacancies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AtomicStump {
    pub m: u32,
    pub n: u32,
}

impl AtomicStump {
    pub fn new(m: u32, n: u32) -> Self {
        AtomicStump { m, n }
    }

    /// Nodes contributed to a tree: the root plus its `m` leaves.
    pub fn nodes(&self) -> u32 {
        self.m + 1
    }
}

// Stumps sort by arity m+n, then by vacancies, so s(1,0) < s(0,1) < s(2,0).
impl Ord for AtomicStump {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.m + self.n, self.n).cmp(&(other.m + other.n, other.n))
    }
}

impl PartialOrd for AtomicStump {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AtomicStump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s({},{})", self.m, self.n)
    }
}

/// Sorted multiset of atomic stumps; the identity of an isomeric class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StumpSignature {
    stumps: Vec<AtomicStump>,
}

impl StumpSignature {
    pub fn new(mut stumps: Vec<AtomicStump>) -> Self {
        stumps.sort_unstable();
        StumpSignature { stumps }
    }

    /// Convenience constructor from `(m, n)` pairs in any order.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        Self::new(pairs.iter().map(|&(m, n)| AtomicStump::new(m, n)).collect())
    }

    pub fn stumps(&self) -> &[AtomicStump] {
        &self.stumps
    }

    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    /// `Σ (m + 1)`, the order of every tree with this signature.
    pub fn order(&self) -> usize {
        self.stumps.iter().map(|s| s.nodes() as usize).sum()
    }

    pub fn vacancies(&self) -> usize {
        self.stumps.iter().map(|s| s.n as usize).sum()
    }

    pub fn pairs(&self) -> Vec<[u32; 2]> {
        self.stumps.iter().map(|s| [s.m, s.n]).collect()
    }

    fn from_keys(keys: &[u16]) -> Self {
        let stumps = keys
            .iter()
            .map(|&k| {
                let n = (k & 0xff) as u32;
                AtomicStump::new((k >> 8) as u32 - n, n)
            })
            .collect();
        StumpSignature { stumps }
    }
}

impl fmt::Display for StumpSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.stumps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", s.m, s.n)?;
        }
        f.write_str("}")
    }
}

impl Serialize for StumpSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.stumps.len()))?;
        for s in &self.stumps {
            seq.serialize_element(&[s.m, s.n])?;
        }
        seq.end()
    }
}

/// Per-node `(leaf children, internal children)` counts of a level sequence.
fn stump_counts(levels: &[u32], counts: &mut Vec<(u32, u32)>, last_at: &mut Vec<usize>) {
    let len = levels.len();
    counts.clear();
    counts.resize(len, (0, 0));
    last_at.clear();
    last_at.resize(len, 0);
    for i in 1..len {
        let level = levels[i] as usize;
        last_at[level] = i;
        let parent = last_at[level - 1];
        let is_leaf = i + 1 == len || levels[i + 1] <= levels[i];
        if is_leaf {
            counts[parent].0 += 1;
        } else {
            counts[parent].1 += 1;
        }
    }
}

/// Packs the signature of a level sequence into sortable `u16` keys
/// `(m+n) << 8 | n`. Requires order ≤ 255.
fn signature_keys(levels: &[u32], keys: &mut Vec<u16>, counts: &mut Vec<(u32, u32)>, last_at: &mut Vec<usize>) {
    keys.clear();
    if levels.len() == 1 {
        keys.push(0);
        return;
    }
    stump_counts(levels, counts, last_at);
    keys.extend(
        counts
            .iter()
            .filter(|&&(m, n)| m + n > 0)
            .map(|&(m, n)| (((m + n) << 8) | n) as u16),
    );
    keys.sort_unstable();
}

/// One atomic stump per internal node; `τ` maps to `{s(0,0)}`.
pub fn factorize(t: &Tree) -> StumpSignature {
    if t.order() == 1 {
        return StumpSignature::new(vec![AtomicStump::new(0, 0)]);
    }
    let mut counts = Vec::new();
    let mut last_at = Vec::new();
    stump_counts(t.levels(), &mut counts, &mut last_at);
    StumpSignature::new(
        counts
            .into_iter()
            .filter(|&(m, n)| m + n > 0)
            .map(|(m, n)| AtomicStump::new(m, n))
            .collect(),
    )
}

/// A set of trees sharing one stump signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsomericClass {
    pub signature: StumpSignature,
    pub members: Vec<Tree>,
}

impl IsomericClass {
    pub fn order(&self) -> usize {
        self.signature.order()
    }
}

/// All isomeric classes of one order, sorted by signature; members keep
/// enumeration order. Materializes every tree of the order.
pub fn classes(order: usize) -> Result<Vec<IsomericClass>, StumpError> {
    let trees = trees::enumerate(order).map_err(|_| StumpError::ZeroOrder)?;
    let mut groups: BTreeMap<StumpSignature, Vec<Tree>> = BTreeMap::new();
    for t in trees {
        groups.entry(factorize(&t)).or_default().push(t);
    }
    Ok(groups
        .into_iter()
        .map(|(signature, members)| IsomericClass { signature, members })
        .collect())
}

/// Classes of every order `1..=max_order`, concatenated by increasing order.
pub fn classes_up_to(max_order: usize) -> Result<Vec<IsomericClass>, StumpError> {
    let mut all = Vec::new();
    for p in 1..=max_order {
        all.extend(classes(p)?);
    }
    Ok(all)
}

const CHUNK_TREES: usize = 1 << 15;

/// Class sizes of one order without materializing members. Trees stream
/// from the generator in chunks that workers reduce into signature counts;
/// the merged result does not depend on the worker count.
pub fn class_sizes(order: usize, deadline: Option<Instant>) -> Result<BTreeMap<StumpSignature, u64>, StumpError> {
    if order > 255 {
        return Err(StumpError::OrderTooLarge(order));
    }
    let mut gen = LevelSequences::new(order).map_err(|_| StumpError::ZeroOrder)?;
    let mut totals: HashMap<Vec<u16>, u64> = HashMap::new();
    let mut chunk: Vec<u32> = Vec::with_capacity(CHUNK_TREES * order);
    loop {
        chunk.clear();
        while chunk.len() < CHUNK_TREES * order {
            match gen.advance() {
                Some(levels) => chunk.extend_from_slice(levels),
                None => break,
            }
        }
        if chunk.is_empty() {
            break;
        }
        let partial = parallel::install(|| {
            chunk
                .par_chunks(order * 1024)
                .map(|block| {
                    let mut local: HashMap<Vec<u16>, u64> = HashMap::new();
                    let (mut keys, mut counts, mut last_at) = (Vec::new(), Vec::new(), Vec::new());
                    for levels in block.chunks_exact(order) {
                        signature_keys(levels, &mut keys, &mut counts, &mut last_at);
                        match local.get_mut(keys.as_slice()) {
                            Some(c) => *c += 1,
                            None => {
                                local.insert(keys.clone(), 1);
                            }
                        }
                    }
                    local
                })
                .reduce(HashMap::new, merge_counts)
        });
        totals = merge_counts(totals, partial);
        if let Some(deadline) = deadline {
            if Instant::now() > deadline {
                return Err(StumpError::BudgetExceeded { order, budget: Duration::ZERO });
            }
        }
    }
    Ok(totals
        .into_iter()
        .map(|(k, v)| (StumpSignature::from_keys(&k), v))
        .collect())
}

fn merge_counts(mut a: HashMap<Vec<u16>, u64>, b: HashMap<Vec<u16>, u64>) -> HashMap<Vec<u16>, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// One row of the count table: trees (`m_p`) and classes (`n_p`) of order
/// `p` with their running totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub p: usize,
    pub m: BigUint,
    pub m_total: BigUint,
    pub n: BigUint,
    pub n_total: BigUint,
}

fn accumulate(per_order: Vec<(BigUint, BigUint)>) -> Vec<CountRow> {
    let mut m_total = BigUint::zero();
    let mut n_total = BigUint::zero();
    per_order
        .into_iter()
        .enumerate()
        .map(|(i, (m, n))| {
            m_total += &m;
            n_total += &n;
            CountRow { p: i + 1, m, m_total: m_total.clone(), n, n_total: n_total.clone() }
        })
        .collect()
}

/// Counts trees and classes by streaming every tree of each order.
/// `budget` bounds total wall time; exceeding it is an error.
pub fn count_by_enumeration(max_order: usize, budget: Option<Duration>) -> Result<Vec<CountRow>, StumpError> {
    if max_order == 0 {
        return Err(StumpError::ZeroOrder);
    }
    let start = Instant::now();
    let deadline = budget.map(|b| start + b);
    let mut per_order = Vec::with_capacity(max_order);
    for p in 1..=max_order {
        let sizes = class_sizes(p, deadline).map_err(|e| match e {
            StumpError::BudgetExceeded { order, .. } => StumpError::BudgetExceeded { order, budget: budget.unwrap_or_default() },
            other => other,
        })?;
        let m: u64 = sizes.values().sum();
        per_order.push((BigUint::from(m), BigUint::from(sizes.len())));
    }
    Ok(accumulate(per_order))
}

/// Number of unordered rooted trees with `p` nodes for `p = 1..=max_order`,
/// from `a(n+1) = (1/n) Σ_{k=1..n} (Σ_{d|k} d·a(d)) · a(n−k+1)`.
pub fn rooted_tree_counts(max_order: usize) -> Vec<BigUint> {
    let mut a = vec![BigUint::zero(); max_order + 1];
    if max_order >= 1 {
        a[1] = BigUint::from(1u32);
    }
    // divisor sums s(k) = Σ_{d|k} d·a(d), filled lazily as a grows
    let mut s = vec![BigUint::zero(); max_order + 1];
    for n in 1..max_order {
        s[n] = (1..=n).filter(|d| n % d == 0).map(|d| &a[d] * BigUint::from(d)).sum();
        let total: BigUint = (1..=n).map(|k| &s[k] * &a[n - k + 1]).sum();
        a[n + 1] = total / BigUint::from(n);
    }
    a.split_off(1)
}

/// Number of stump multisets of each order `p = 1..=max_order`.
///
/// A multiset qualifies when every stump has `m + n ≥ 1`, the node total
/// `Σ (m+1)` equals `p` and the vacancies balance: `Σ n = k − 1` for `k`
/// stumps, i.e. `Σ (n − 1) = −1`. Order 1 contributes the lone `s(0,0)`.
pub fn stump_multiset_counts(max_order: usize) -> Vec<BigUint> {
    let big_p = max_order;
    if big_p == 0 {
        return Vec::new();
    }
    // excess e = Σ(n−1) is kept in [−P, P]; a partial state above P can
    // never come back to −1 because each stump lowers e by at most 1 and
    // costs at least one node.
    let offset = big_p as i64;
    let width = 2 * big_p + 1;
    let mut dp = vec![vec![BigUint::zero(); width]; big_p + 1];
    dp[0][offset as usize] = BigUint::from(1u32);
    for n in 0..big_p as u32 {
        for m in 0..big_p as u32 {
            if m + n == 0 {
                continue;
            }
            let w = (m + 1) as usize;
            if w > big_p {
                break;
            }
            let de = n as i64 - 1;
            // ascending weight gives unbounded multiplicity of this stump
            for weight in w..=big_p {
                for e in 0..width {
                    let src = e as i64 - de;
                    if src < 0 || src >= width as i64 {
                        continue;
                    }
                    let (lo, hi) = dp.split_at_mut(weight);
                    let from = &lo[weight - w][src as usize];
                    if !from.is_zero() {
                        hi[0][e] += from;
                    }
                }
            }
        }
    }
    (1..=big_p)
        .map(|p| if p == 1 { BigUint::from(1u32) } else { dp[p][(offset - 1) as usize].clone() })
        .collect()
}

/// Counts trees by the rooted-tree recurrence and classes by the stump
/// multiset dynamic program. Never enumerates a tree.
pub fn count_by_recurrence(max_order: usize) -> Vec<CountRow> {
    let m = rooted_tree_counts(max_order);
    let n = stump_multiset_counts(max_order);
    accumulate(m.into_iter().zip(n).collect())
}

/// Count table as TSV with header `p\tm_p\tM_p\tn_p\tN_p`.
pub fn count_table_tsv(rows: &[CountRow]) -> String {
    let mut out = String::from("p\tm_p\tM_p\tn_p\tN_p\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.p, r.m, r.m_total, r.n, r.n_total));
    }
    out
}

/// Parses a count table written by [`count_table_tsv`].
pub fn parse_count_table_tsv(text: &str) -> Option<Vec<CountRow>> {
    let mut lines = text.lines();
    if lines.next()? != "p\tm_p\tM_p\tn_p\tN_p" {
        return None;
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return None;
            }
            Some(CountRow {
                p: f[0].parse().ok()?,
                m: f[1].parse().ok()?,
                m_total: f[2].parse().ok()?,
                n: f[3].parse().ok()?,
                n_total: f[4].parse().ok()?,
            })
        })
        .collect()
}

/// Class listing as JSON: `{"order":P,"classes":[{"signature":[[m,n],..],"members":[..]}]}`.
/// Above `member_cap` the member lists are replaced by a `size` field.
pub fn classes_json(order: usize, member_cap: usize) -> Result<serde_json::Value, StumpError> {
    use serde_json::json;
    let classes: Vec<serde_json::Value> = if order <= member_cap {
        classes(order)?
            .into_iter()
            .map(|c| json!({ "signature": c.signature, "members": c.members }))
            .collect()
    } else {
        class_sizes(order, None)?
            .into_iter()
            .map(|(sig, size)| json!({ "signature": sig, "size": size }))
            .collect()
    };
    Ok(json!({ "order": order, "classes": classes }))
}
