//! Pair partitions, ordered set partitions and the statistics the limit formulas need.
//!
//! Positions are 1-based throughout: a partition of `n` covers `{1, ..., n}`.

use std::fmt;

use crate::error::{Error, Result};

/// A partition of `{1, ..., n}` into two-element blocks.
///
/// Blocks are stored as `(i, j)` with `i < j`, sorted by their smaller element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairPartition {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    /// Validates and normalizes a list of pairs covering `{1, ..., n}`.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n % 2 != 0 || pairs.len() * 2 != n {
            return Err(Error::InvalidArgument(format!(
                "{} pairs cannot cover {{1..{n}}}",
                pairs.len()
            )));
        }
        let mut seen = vec![false; n + 1];
        let mut sorted = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == 0 || j > n || i == j || seen[i] || seen[j] {
                return Err(Error::InvalidArgument(format!("bad block {{{a},{b}}} for n={n}")));
            }
            seen[i] = true;
            seen[j] = true;
            sorted.push((i, j));
        }
        sorted.sort_unstable();
        Ok(PairPartition { n, pairs: sorted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn num_blocks(&self) -> usize {
        self.pairs.len()
    }

    /// For each position `1..=n`, the 1-based index of the block containing it.
    pub fn block_pattern(&self) -> Vec<usize> {
        self.pattern_with_labels(|b| b + 1)
    }

    /// Like [`block_pattern`](Self::block_pattern) but with block `b` (0-based)
    /// mapped to `label(b)`.
    pub fn pattern_with_labels(&self, label: impl Fn(usize) -> usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (b, &(i, j)) in self.pairs.iter().enumerate() {
            out[i - 1] = label(b);
            out[j - 1] = label(b);
        }
        out
    }
}

impl fmt::Display for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in &self.pairs {
            write!(f, "{{{i},{j}}}")?;
        }
        Ok(())
    }
}

/// Streams every pair partition of `{1, ..., n}` to `f`.
///
/// Order: the smallest unpaired element is paired with each larger unpaired
/// element in increasing order, recursively. Odd `n` yields nothing; `n = 0`
/// yields the empty partition once.
pub fn for_each_pair_partition(n: usize, mut f: impl FnMut(&PairPartition)) {
    if n % 2 != 0 {
        return;
    }
    let mut used = vec![false; n + 1];
    let mut current = PairPartition { n, pairs: Vec::with_capacity(n / 2) };
    pair_rec(&mut used, &mut current, &mut f);
}

fn pair_rec(used: &mut [bool], cur: &mut PairPartition, f: &mut impl FnMut(&PairPartition)) {
    let n = cur.n;
    let Some(first) = (1..=n).find(|&i| !used[i]) else {
        f(cur);
        return;
    };
    used[first] = true;
    for partner in first + 1..=n {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        cur.pairs.push((first, partner));
        pair_rec(used, cur, f);
        cur.pairs.pop();
        used[partner] = false;
    }
    used[first] = false;
}

/// All pair partitions of `{1, ..., n}`, materialized.
pub fn pair_partitions(n: usize) -> Vec<PairPartition> {
    let mut out = Vec::new();
    for_each_pair_partition(n, |p| out.push(p.clone()));
    out
}

/// Number of block pairs `{a,b}`, `{c,d}` with `a < c < b < d`.
pub fn crossing_number(p: &PairPartition) -> usize {
    let pairs = p.pairs();
    let mut count = 0;
    for (x, &(_, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[x + 1..] {
            // pairs are sorted by first element, so a < c
            if c < b && b < d {
                count += 1;
            }
        }
    }
    count
}

pub fn is_noncrossing(p: &PairPartition) -> bool {
    crossing_number(p) == 0
}

/// Second route to noncrossing-ness: repeatedly delete a block whose two
/// elements are adjacent among the surviving positions.
pub fn reduces_by_neighbour_elimination(p: &PairPartition) -> bool {
    let mut seq = p.block_pattern();
    'outer: while !seq.is_empty() {
        for k in 0..seq.len() - 1 {
            if seq[k] == seq[k + 1] {
                seq.drain(k..k + 2);
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// True iff every block is `{2k-1, 2k}`.
pub fn is_interval(p: &PairPartition) -> bool {
    p.pairs().iter().all(|&(i, j)| j == i + 1 && i % 2 == 1)
}

/// For each block, the index of the innermost block strictly enclosing it.
fn nesting_parents(p: &PairPartition) -> Vec<Option<usize>> {
    let pairs = p.pairs();
    pairs
        .iter()
        .map(|&(a, b)| {
            pairs
                .iter()
                .enumerate()
                .filter(|&(_, &(c, d))| c < a && b < d)
                .max_by_key(|&(_, &(c, _))| c)
                .map(|(w, _)| w)
        })
        .collect()
}

/// Number of bijections from blocks to `{1, ..., n/2}` in which every block
/// nested inside another receives a larger number. Zero for crossing partitions.
///
/// Computed with the hook-length formula for forests: `(n/2)! / prod(subtree sizes)`.
pub fn monotone_labelings(p: &PairPartition) -> u128 {
    if !is_noncrossing(p) {
        return 0;
    }
    let parents = nesting_parents(p);
    let mut subtree = vec![1u128; parents.len()];
    // a parent always starts before its children, so walk blocks from the right
    for b in (0..parents.len()).rev() {
        if let Some(w) = parents[b] {
            subtree[w] += subtree[b];
        }
    }
    let fact: u128 = (1..=parents.len() as u128).product();
    fact / subtree.iter().product::<u128>()
}

/// Streams every monotone labeling of a noncrossing `p` as a vector
/// `labels[b]` in `1..=n/2` for block `b`.
pub fn for_each_monotone_labeling(p: &PairPartition, mut f: impl FnMut(&[usize])) {
    if !is_noncrossing(p) {
        return;
    }
    let parents = nesting_parents(p);
    let mut labels = vec![0usize; parents.len()];
    labeling_rec(&parents, &mut labels, 1, &mut f);
}

fn labeling_rec(
    parents: &[Option<usize>],
    labels: &mut [usize],
    next: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if next > labels.len() {
        f(labels);
        return;
    }
    for b in 0..labels.len() {
        let ready = labels[b] == 0 && parents[b].is_none_or(|w| labels[w] != 0);
        if ready {
            labels[b] = next;
            labeling_rec(parents, labels, next + 1, f);
            labels[b] = 0;
        }
    }
}

/// An ordered set partition of `{1, ..., n}`, stored as the rank of the block
/// containing each position: `ranks[k - 1] = r` puts position `k` in block `r`
/// (1-based), and block order is rank order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedSetPartition {
    ranks: Vec<usize>,
    num_blocks: usize,
}

impl OrderedSetPartition {
    /// Builds from a rank vector; ranks must be exactly `{1, ..., b}` for some `b`.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        let b = ranks.iter().copied().max().unwrap_or(0);
        let mut hit = vec![false; b + 1];
        for &r in &ranks {
            if r == 0 {
                return Err(Error::InvalidArgument("ranks are 1-based".into()));
            }
            hit[r] = true;
        }
        if hit[1..].iter().any(|h| !h) {
            return Err(Error::InvalidArgument(format!("ranks {ranks:?} skip a block")));
        }
        Ok(OrderedSetPartition { ranks, num_blocks: b })
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Blocks in order, each a sorted list of 1-based positions.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks];
        for (k, &r) in self.ranks.iter().enumerate() {
            out[r - 1].push(k + 1);
        }
        out
    }
}

/// Streams every unordered set partition of `{1, ..., n}` with at most
/// `max_blocks` blocks as a restricted growth string (0-based block ids in
/// order of first occurrence).
pub fn for_each_set_partition(n: usize, max_blocks: usize, mut f: impl FnMut(&[usize], usize)) {
    if n == 0 {
        f(&[], 0);
        return;
    }
    let mut rgs = vec![0usize; n];
    rgs_rec(&mut rgs, 1, 1, max_blocks, &mut f);
}

fn rgs_rec(
    rgs: &mut [usize],
    pos: usize,
    blocks: usize,
    max_blocks: usize,
    f: &mut impl FnMut(&[usize], usize),
) {
    if max_blocks == 0 {
        return;
    }
    if pos == rgs.len() {
        f(rgs, blocks);
        return;
    }
    for b in 0..blocks.min(max_blocks) {
        rgs[pos] = b;
        rgs_rec(rgs, pos + 1, blocks, max_blocks, f);
    }
    if blocks < max_blocks {
        rgs[pos] = blocks;
        rgs_rec(rgs, pos + 1, blocks + 1, max_blocks, f);
    }
}

/// Advances `perm` to the next permutation in lexicographic order.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Streams all orderings of one unordered partition (given as a restricted
/// growth string with `blocks` blocks) as ordered set partitions.
pub fn for_each_ordering(rgs: &[usize], blocks: usize, mut f: impl FnMut(&OrderedSetPartition)) {
    let mut perm: Vec<usize> = (1..=blocks).collect();
    let mut osp = OrderedSetPartition { ranks: vec![0; rgs.len()], num_blocks: blocks };
    loop {
        for (r, &b) in osp.ranks.iter_mut().zip(rgs) {
            *r = perm[b];
        }
        f(&osp);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

/// Streams every ordered set partition of `{1, ..., n}` with at most
/// `max_blocks` blocks.
pub fn for_each_ordered_set_partition(
    n: usize,
    max_blocks: usize,
    mut f: impl FnMut(&OrderedSetPartition),
) {
    for_each_set_partition(n, max_blocks, |rgs, blocks| {
        for_each_ordering(rgs, blocks, &mut f);
    });
}

pub fn ordered_set_partitions(n: usize, max_blocks: usize) -> Vec<OrderedSetPartition> {
    let mut out = Vec::new();
    for_each_ordered_set_partition(n, max_blocks, |p| out.push(p.clone()));
    out
}
