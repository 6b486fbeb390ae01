//! Finite-`N` moments of normalized sums `S_N^{(j)} = (b_1^{(j)} + ... + b_N^{(j)}) / √N`,
//! their pair-partition limits, and runnable checks of the limit theorem's
//! hypotheses (singleton condition, bound, order-preserving invariance).

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{normalize_word, IndependenceKind, Label, MomentEvaluator, SiteDistribution, Word};
use crate::partitions::{
    crossing_number, for_each_monotone_labeling, for_each_ordering, for_each_ordered_set_partition,
    for_each_pair_partition, for_each_set_partition, next_permutation,
};
use crate::poly::QPoly;
use crate::scalar::{binomial, factorial, falling_factorial, format_rational, rational_sqrt, rational_to_f64, Rational, Scalar};

/// A moment problem: which independence, the single-site data, and the
/// label sequence `(j_1, ..., j_n)` of the product `S_N^{(j_1)} ⋯ S_N^{(j_n)}`.
#[derive(Clone, Debug)]
pub struct CltProblem {
    pub kind: IndependenceKind,
    pub dist: SiteDistribution,
    pub labels: Vec<Label>,
}

impl CltProblem {
    /// Rejects empty label sequences and non-centered labels.
    pub fn new(kind: IndependenceKind, dist: SiteDistribution, labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("label sequence is empty".into()));
        }
        for l in &labels {
            let m1 = dist.get(&[l.id])?;
            if !m1.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "label {:?} is not centered (first moment {m1})",
                    dist.alphabet().name(l.id)
                )));
            }
        }
        Ok(CltProblem { kind, dist, labels })
    }

    /// The moment `φ(S_N^n)` of the single label `b`.
    pub fn single_label(kind: IndependenceKind, dist: SiteDistribution, n: usize) -> Result<Self> {
        let b = dist.alphabet().label_at(0);
        CltProblem::new(kind, dist, vec![b; n])
    }

    pub fn degree(&self) -> usize {
        self.labels.len()
    }
}

/// An exact value of the form `coefficient · N^{-1/2}` (when `inv_sqrt = Some(N)`)
/// or plain `coefficient`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedMoment {
    pub coefficient: Scalar,
    pub inv_sqrt: Option<u64>,
}

impl NormalizedMoment {
    pub fn exact(value: Scalar) -> Self {
        NormalizedMoment { coefficient: value, inv_sqrt: None }
    }

    /// `coefficient · N^{-1/2}`, folded into the coefficient when `N` is a square.
    pub fn with_inv_sqrt(coefficient: Scalar, size: u64) -> Self {
        let r = Rational::from_integer(size.into());
        match rational_sqrt(&r) {
            Some(root) => NormalizedMoment::exact(coefficient.scale(&root.recip())),
            None if coefficient.is_zero() => NormalizedMoment::exact(coefficient),
            None => NormalizedMoment { coefficient, inv_sqrt: Some(size) },
        }
    }

    /// The value as a Gaussian rational, when it is one.
    pub fn as_scalar(&self) -> Option<&Scalar> {
        self.inv_sqrt.is_none().then_some(&self.coefficient)
    }

    /// `|value|²`, always rational.
    pub fn abs_squared(&self) -> Rational {
        let n = self.coefficient.norm_sqr();
        match self.inv_sqrt {
            Some(size) => n / Rational::from_integer(size.into()),
            None => n,
        }
    }

    /// Real part as a float.
    pub fn approx(&self) -> f64 {
        let c = self.coefficient.approx();
        match self.inv_sqrt {
            Some(size) => c / (size as f64).sqrt(),
            None => c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }
}

impl fmt::Display for NormalizedMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inv_sqrt {
            None => write!(f, "{}", self.coefficient),
            Some(size) if self.coefficient.is_real() => write!(f, "{}/sqrt({size})", self.coefficient),
            Some(size) => write!(f, "({})/sqrt({size})", self.coefficient),
        }
    }
}

/// `φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})` as a function of `N`, stored as
/// `N^{-n/2} Σ_b w_b(N) · sums[b]` where `sums[b]` collects the moments of all
/// site patterns with `b` distinct sites.
#[derive(Clone, Debug)]
pub struct FiniteNExpansion {
    degree: usize,
    ordered: bool,
    sums: Vec<Scalar>,
}

impl FiniteNExpansion {
    /// Sums over ordered set partitions; a pattern with `b` blocks stands for
    /// the `C(N, b)` site assignments inducing it. Valid for every kind.
    pub fn ordered(p: &CltProblem) -> Result<Self> {
        let n = p.degree();
        let sums = partition_sums(n, |rgs, blocks, ev, sums| {
            let mut err = None;
            for_each_ordering(rgs, blocks, |osp| {
                if err.is_some() {
                    return;
                }
                let w = normalize_word(&Word::from_pattern(osp.ranks(), &p.labels));
                match ev.evaluate(&w) {
                    Ok(v) => sums[blocks] += v,
                    Err(e) => err = Some(e),
                }
            });
            err.map_or(Ok(()), Err)
        }, p)?;
        Ok(FiniteNExpansion { degree: n, ordered: true, sums })
    }

    /// Sums over unordered set partitions with weight `N (N-1) ⋯ (N-b+1)`.
    /// Only valid for kinds invariant under arbitrary site relabeling.
    pub fn exchangeable(p: &CltProblem) -> Result<Self> {
        if !p.kind.is_exchangeable() {
            return Err(Error::InvalidArgument(format!(
                "{} moments depend on site order; use the ordered expansion",
                p.kind
            )));
        }
        let n = p.degree();
        let sums = partition_sums(n, |rgs, blocks, ev, sums| {
            let sites: Vec<usize> = rgs.iter().map(|b| b + 1).collect();
            let w = normalize_word(&Word::from_pattern(&sites, &p.labels));
            sums[blocks] += ev.evaluate(&w)?;
            Ok(())
        }, p)?;
        Ok(FiniteNExpansion { degree: n, ordered: false, sums })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Un-normalized sum `Σ_σ φ(b_σ(1) ⋯ b_σ(n))` over all `σ: [n] → [N]`.
    pub fn raw_sum(&self, size: u64) -> Scalar {
        let mut total = Scalar::zero();
        for (b, s) in self.sums.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let w: BigInt = if self.ordered {
                binomial(size, b as u64)
            } else {
                falling_factorial(size, b as u64)
            };
            total += s.scale(&Rational::from_integer(w));
        }
        total
    }

    /// `φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})` exactly.
    pub fn at(&self, size: u64) -> Result<NormalizedMoment> {
        if size == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let raw = self.raw_sum(size);
        let half = (self.degree / 2) as u32;
        let scale = Rational::from_integer(BigInt::from(size).pow(half)).recip();
        let coefficient = raw.scale(&scale);
        Ok(if self.degree % 2 == 1 {
            NormalizedMoment::with_inv_sqrt(coefficient, size)
        } else {
            NormalizedMoment::exact(coefficient)
        })
    }
}

/// Runs `body` over every unordered set partition of `[n]` in parallel, with a
/// per-worker evaluator, and adds up the per-block-count sums.
fn partition_sums<'p, F>(n: usize, body: F, p: &'p CltProblem) -> Result<Vec<Scalar>>
where
    F: Fn(&[usize], usize, &mut MomentEvaluator<'p>, &mut [Scalar]) -> Result<()> + Sync,
{
    let mut parts: Vec<(Vec<usize>, usize)> = Vec::new();
    for_each_set_partition(n, n, |rgs, blocks| parts.push((rgs.to_vec(), blocks)));
    parts
        .par_iter()
        .try_fold(
            || (MomentEvaluator::new(p.kind, &p.dist), vec![Scalar::zero(); n + 1]),
            |(mut ev, mut sums), (rgs, blocks)| {
                body(rgs, *blocks, &mut ev, &mut sums)?;
                Ok((ev, sums))
            },
        )
        .map(|r: Result<_>| r.map(|(_, sums)| sums))
        .try_reduce(
            || vec![Scalar::zero(); n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )
}

/// `φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})` for one `N`.
pub fn finite_n_moment(p: &CltProblem, size: u64) -> Result<NormalizedMoment> {
    FiniteNExpansion::ordered(p)?.at(size)
}

/// `lim_N φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})`.
///
/// Only pair partitions appear: patterns with a singleton site vanish, and
/// sites visited three or more times leave fewer than `n/2` sites, so their
/// `N^{b}` growth is beaten by the `N^{-n/2}` normalization. Exchangeable kinds
/// sum over unordered pair partitions; the monotone kind sums over pair
/// partitions with every order of their sites compatible with nesting and
/// divides by `(n/2)!`.
pub fn limit_moment(p: &CltProblem) -> Result<Scalar> {
    let n = p.degree();
    if n % 2 == 1 {
        return Ok(Scalar::zero());
    }
    let mut ev = MomentEvaluator::new(p.kind, &p.dist);
    let mut total = Scalar::zero();
    let mut err = None;
    if p.kind.is_exchangeable() {
        for_each_pair_partition(n, |pp| {
            if err.is_some() {
                return;
            }
            let w = normalize_word(&Word::from_pattern(&pp.block_pattern(), &p.labels));
            match ev.evaluate(&w) {
                Ok(v) => total += v,
                Err(e) => err = Some(e),
            }
        });
    } else {
        for_each_pair_partition(n, |pp| {
            for_each_monotone_labeling(pp, |labels| {
                if err.is_some() {
                    return;
                }
                let sites = pp.pattern_with_labels(|b| labels[b]);
                let w = normalize_word(&Word::from_pattern(&sites, &p.labels));
                match ev.evaluate(&w) {
                    Ok(v) => total += v,
                    Err(e) => err = Some(e),
                }
            });
        });
        if err.is_none() {
            total = total.scale(&Rational::from_integer(factorial(n as u64 / 2)).recip());
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// The limit written as a sum over all maps `σ: [n] → [n/2]` with two-element
/// fibers, divided by `(n/2)!`. Exponential in `n/2`; a second route to
/// [`limit_moment`].
pub fn limit_moment_over_maps(p: &CltProblem) -> Result<Scalar> {
    let n = p.degree();
    if n % 2 == 1 {
        return Ok(Scalar::zero());
    }
    let mut ev = MomentEvaluator::new(p.kind, &p.dist);
    let mut total = Scalar::zero();
    let mut err = None;
    for_each_pair_partition(n, |pp| {
        let mut perm: Vec<usize> = (1..=n / 2).collect();
        loop {
            if err.is_some() {
                return;
            }
            let sites = pp.pattern_with_labels(|b| perm[b]);
            match ev.evaluate(&normalize_word(&Word::from_pattern(&sites, &p.labels))) {
                Ok(v) => total += v,
                Err(e) => err = Some(e),
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total.scale(&Rational::from_integer(factorial(n as u64 / 2)).recip()))
}

/// `Σ_π q^{cr(π)}` over pair partitions of `[n]`: the q-Gaussian moments.
pub fn q_limit_moment(n: usize) -> QPoly {
    let mut counts: Vec<i64> = Vec::new();
    for_each_pair_partition(n, |p| {
        let c = crossing_number(p);
        if counts.len() <= c {
            counts.resize(c + 1, 0);
        }
        counts[c] += 1;
    });
    if n % 2 == 1 {
        return QPoly::zero();
    }
    QPoly::from_ints(&counts)
}

/// A failing word (and, for invariance checks, its transformed partner).
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub word: Word,
    pub value: Scalar,
    pub partner: Option<(Word, Scalar)>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ{} = {}", self.word, self.value)?;
        if let Some((w, v)) = &self.partner {
            write!(f, " but φ{w} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub words_checked: usize,
    pub witness: Option<Witness>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Calls `f(pattern, labels)` for every site pattern (ordered set partition)
/// of every length `1..=n_max` and every label sequence; stops when `f`
/// returns `false`.
fn for_each_word_shape(
    dist: &SiteDistribution,
    n_max: usize,
    mut f: impl FnMut(&[usize], &[Label]) -> Result<bool>,
) -> Result<()> {
    let alphabet: Vec<Label> = dist.alphabet().labels().collect();
    for len in 1..=n_max {
        let mut stop = None;
        for_each_ordered_set_partition(len, len, |osp| {
            if stop.is_some() {
                return;
            }
            let mut idx = vec![0usize; len];
            loop {
                let labels: Vec<Label> = idx.iter().map(|&i| alphabet[i]).collect();
                match f(osp.ranks(), &labels) {
                    Ok(true) => {}
                    Ok(false) => {
                        stop = Some(Ok(()));
                        return;
                    }
                    Err(e) => {
                        stop = Some(Err(e));
                        return;
                    }
                }
                // odometer over label choices
                let mut k = 0;
                while k < len {
                    idx[k] += 1;
                    if idx[k] < alphabet.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == len {
                    break;
                }
            }
        });
        if let Some(r) = stop {
            return r;
        }
    }
    Ok(())
}

/// Every word of length `≤ n_max` with a site visited exactly once must have
/// moment zero. Words are scanned by increasing length, so the witness is minimal.
pub fn check_singleton(kind: IndependenceKind, dist: &SiteDistribution, n_max: usize) -> Result<HypothesisReport> {
    let mut ev = MomentEvaluator::new(kind, dist);
    let mut report = HypothesisReport { words_checked: 0, witness: None };
    for_each_word_shape(dist, n_max, |ranks, labels| {
        let b = ranks.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; b + 1];
        for &r in ranks {
            counts[r] += 1;
        }
        if !counts.contains(&1) {
            return Ok(true);
        }
        let w = normalize_word(&Word::from_pattern(ranks, labels));
        let v = ev.evaluate(&w)?;
        report.words_checked += 1;
        if !v.is_zero() {
            report.witness = Some(Witness { word: w, value: v, partner: None });
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(report)
}

/// Every order-preserving injection of the occurring sites into
/// `{1, ..., n_max + 2}` must leave the moment unchanged.
pub fn check_spreadability(kind: IndependenceKind, dist: &SiteDistribution, n_max: usize) -> Result<HypothesisReport> {
    let mut ev = MomentEvaluator::new(kind, dist);
    let mut report = HypothesisReport { words_checked: 0, witness: None };
    let target = n_max + 2;
    for_each_word_shape(dist, n_max, |ranks, labels| {
        let b = ranks.iter().copied().max().unwrap_or(0);
        let w = normalize_word(&Word::from_pattern(ranks, labels));
        let base = ev.evaluate(&w)?;
        // increasing b-subsets of {1..target}
        let mut image: Vec<u32> = (1..=b as u32).collect();
        loop {
            let moved = w.map_sites(|s| image[s as usize - 1]);
            let v = ev.evaluate(&moved)?;
            report.words_checked += 1;
            if v != base {
                report.witness = Some(Witness { word: w.clone(), value: base, partner: Some((moved, v)) });
                return Ok(false);
            }
            if !next_subset(&mut image, target as u32) {
                break;
            }
        }
        Ok(true)
    })?;
    Ok(report)
}

/// Invariance under arbitrary injective relabelings. Given spreadability this
/// reduces to invariance under permutations of the occurring sites, which is
/// checked by comparing every pattern with its first-occurrence relabeling.
pub fn check_exchangeability(kind: IndependenceKind, dist: &SiteDistribution, n_max: usize) -> Result<HypothesisReport> {
    let mut ev = MomentEvaluator::new(kind, dist);
    let mut report = HypothesisReport { words_checked: 0, witness: None };
    for_each_word_shape(dist, n_max, |ranks, labels| {
        let mut order: Vec<usize> = Vec::new();
        let canonical: Vec<usize> = ranks
            .iter()
            .map(|r| match order.iter().position(|x| x == r) {
                Some(i) => i + 1,
                None => {
                    order.push(*r);
                    order.len()
                }
            })
            .collect();
        if canonical.as_slice() == ranks {
            return Ok(true);
        }
        let w = normalize_word(&Word::from_pattern(ranks, labels));
        let c = normalize_word(&Word::from_pattern(&canonical, labels));
        let (v, vc) = (ev.evaluate(&w)?, ev.evaluate(&c)?);
        report.words_checked += 1;
        if v != vc {
            report.witness = Some(Witness { word: c, value: vc, partner: Some((w, v)) });
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(report)
}

fn next_subset(image: &mut [u32], max: u32) -> bool {
    let b = image.len();
    for i in (0..b).rev() {
        if image[i] < max - (b - 1 - i) as u32 {
            image[i] += 1;
            for k in i + 1..b {
                image[k] = image[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Largest `|φ(word)|` over site patterns of length exactly `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub max_abs_squared: Rational,
    pub witness: Option<Word>,
}

impl BoundReport {
    /// `C_n` exactly, when it is rational.
    pub fn max_abs(&self) -> Option<Rational> {
        rational_sqrt(&self.max_abs_squared)
    }

    pub fn max_abs_f64(&self) -> f64 {
        rational_to_f64(&self.max_abs_squared).sqrt()
    }

    pub fn render(&self) -> String {
        match self.max_abs() {
            Some(r) => format_rational(&r),
            None => format!("sqrt({})", format_rational(&self.max_abs_squared)),
        }
    }
}

/// `C_n = max |φ(b_{σ(1)}^{(j_1)} ⋯ b_{σ(n)}^{(j_n)})|`. Under order-preserving
/// invariance every `σ` is equivalent to one with sites in `{1, ..., n}`, so
/// the ordered set partitions of `[n]` exhaust the family.
pub fn check_bound(kind: IndependenceKind, dist: &SiteDistribution, n: usize) -> Result<BoundReport> {
    let mut ev = MomentEvaluator::new(kind, dist);
    let mut best = BoundReport { max_abs_squared: Rational::zero(), witness: None };
    let alphabet: Vec<Label> = dist.alphabet().labels().collect();
    let mut err = None;
    for_each_ordered_set_partition(n, n, |osp| {
        let mut idx = vec![0usize; n];
        loop {
            if err.is_some() {
                return;
            }
            let labels: Vec<Label> = idx.iter().map(|&i| alphabet[i]).collect();
            let w = normalize_word(&Word::from_pattern(osp.ranks(), &labels));
            match ev.evaluate(&w) {
                Ok(v) => {
                    let a = v.norm_sqr();
                    if a > best.max_abs_squared || best.witness.is_none() {
                        best.max_abs_squared = a;
                        best.witness = Some(w);
                    }
                }
                Err(e) => err = Some(e),
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < alphabet.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// One row of a convergence table; `size = None` is the limit row.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub degree: usize,
    pub size: Option<u64>,
    pub value: NormalizedMoment,
    /// `value − limit`, exact. Absent on the limit row.
    pub error: Option<NormalizedMoment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn finite_rows(&self) -> impl Iterator<Item = &MomentRow> {
        self.rows.iter().filter(|r| r.size.is_some())
    }

    pub fn limit(&self) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.size.is_none())
    }

    /// Smallest `K` with `|error(N)| ≤ K / N` on every finite row, as a float.
    pub fn rate_constant(&self) -> f64 {
        self.finite_rows()
            .filter_map(|r| {
                let e = r.error.as_ref()?;
                Some(rational_to_f64(&e.abs_squared()).sqrt() * r.size? as f64)
            })
            .fold(0.0, f64::max)
    }
}

/// Finite-`N` values for each `N` in `sizes` plus the limit row.
pub fn convergence_table(p: &CltProblem, sizes: &[u64]) -> Result<MomentTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidArgument("N values must be nonempty, positive and ascending".into()));
    }
    let expansion = FiniteNExpansion::ordered(p)?;
    let limit = limit_moment(p)?;
    let mut rows = Vec::with_capacity(sizes.len() + 1);
    for &size in sizes {
        let value = expansion.at(size)?;
        let error = match value.inv_sqrt {
            Some(s) => NormalizedMoment {
                coefficient: &value.coefficient - &limit.scale(&Rational::from_integer(s.into())),
                inv_sqrt: Some(s),
            },
            None => NormalizedMoment::exact(&value.coefficient - &limit),
        };
        rows.push(MomentRow { degree: p.degree(), size: Some(size), value, error: Some(error) });
    }
    rows.push(MomentRow {
        degree: p.degree(),
        size: None,
        value: NormalizedMoment::exact(limit),
        error: None,
    });
    Ok(MomentTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn bern(kind: IndependenceKind, n: usize) -> CltProblem {
        CltProblem::single_label(kind, SiteDistribution::symmetric_bernoulli(n.max(2)), n).unwrap()
    }

    fn int(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    #[test]
    fn finite_n_examples() {
        use IndependenceKind::*;
        assert_eq!(finite_n_moment(&bern(Tensor, 4), 2).unwrap(), NormalizedMoment::exact(int(2)));
        assert_eq!(
            finite_n_moment(&bern(Free, 4), 2).unwrap(),
            NormalizedMoment::exact(Scalar::from_ratio(3, 2))
        );
        assert_eq!(finite_n_moment(&bern(Boolean, 4), 2).unwrap(), NormalizedMoment::exact(int(1)));
        for kind in IndependenceKind::ALL {
            for size in [1, 2, 3, 7] {
                assert_eq!(finite_n_moment(&bern(kind, 2), size).unwrap().as_scalar(), Some(&int(1)));
            }
        }
    }

    #[test]
    fn odd_degrees_vanish_for_symmetric_sites() {
        for kind in IndependenceKind::ALL {
            for n in [1, 3, 5] {
                for size in [1, 2, 3, 5] {
                    assert!(finite_n_moment(&bern(kind, n), size).unwrap().is_zero());
                }
                assert!(limit_moment(&bern(kind, n)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn odd_degree_keeps_half_power() {
        // a skewed centered site: m1 = 0, m2 = 1, m3 = 1
        let d = SiteDistribution::single_label(&[int(0), int(1), int(1)]);
        let p = CltProblem::single_label(IndependenceKind::Tensor, d, 3).unwrap();
        // E(S_N^3) = N m3 / N^{3/2} = 1/sqrt(N)
        let v = finite_n_moment(&p, 2).unwrap();
        assert_eq!(v, NormalizedMoment { coefficient: int(1), inv_sqrt: Some(2) });
        assert_eq!(v.to_string(), "1/sqrt(2)");
        assert_eq!(finite_n_moment(&p, 4).unwrap(), NormalizedMoment::exact(Scalar::from_ratio(1, 2)));
    }

    #[test]
    fn limit_examples() {
        use IndependenceKind::*;
        let d = SiteDistribution::standard_pair;
        let lim = |k, n| limit_moment(&CltProblem::single_label(k, d(), n).unwrap()).unwrap();
        assert_eq!(lim(Tensor, 6), int(15));
        assert_eq!(lim(Free, 6), int(5));
        for n in [2, 4, 6, 8] {
            assert_eq!(lim(Boolean, n), int(1));
        }
        assert_eq!(lim(Monotone, 4), Scalar::from_ratio(3, 2));
        assert_eq!(lim(Monotone, 5), int(0));
    }

    #[test]
    fn q_limit_examples() {
        assert_eq!(q_limit_moment(2), QPoly::from_ints(&[1]));
        assert_eq!(q_limit_moment(4), QPoly::from_ints(&[2, 1]));
        assert_eq!(q_limit_moment(6), QPoly::from_ints(&[5, 6, 3, 1]));
        assert_eq!(q_limit_moment(6).to_string(), "5 + 6*q + 3*q^2 + q^3");
        assert!(q_limit_moment(3).is_zero());
    }

    #[test]
    fn ordered_and_exchangeable_expansions_agree() {
        for kind in [IndependenceKind::Tensor, IndependenceKind::Free, IndependenceKind::Boolean] {
            for n in 1..=6 {
                let p = bern(kind, n);
                let a = FiniteNExpansion::ordered(&p).unwrap();
                let b = FiniteNExpansion::exchangeable(&p).unwrap();
                for size in [1, 2, 3, 5, 16] {
                    assert_eq!(a.at(size).unwrap(), b.at(size).unwrap(), "{kind} n={n} N={size}");
                }
            }
        }
        assert!(FiniteNExpansion::exchangeable(&bern(IndependenceKind::Monotone, 4)).is_err());
    }

    #[test]
    fn literal_map_sum_agrees_with_limit() {
        for kind in IndependenceKind::ALL {
            for n in (2..=8).step_by(2) {
                let p = bern(kind, n);
                assert_eq!(limit_moment(&p).unwrap(), limit_moment_over_maps(&p).unwrap(), "{kind} n={n}");
            }
        }
    }

    #[test]
    fn convergence_table_examples() {
        let t = convergence_table(&bern(IndependenceKind::Tensor, 4), &[1, 2, 4, 8]).unwrap();
        let vals: Vec<Scalar> = t.rows.iter().map(|r| r.value.coefficient.clone()).collect();
        assert_eq!(
            vals,
            vec![int(1), int(2), Scalar::from_ratio(5, 2), Scalar::from_ratio(11, 4), int(3)]
        );
        let t = convergence_table(&bern(IndependenceKind::Boolean, 4), &[1, 2, 4]).unwrap();
        assert!(t.rows.iter().all(|r| r.value.coefficient == int(1)));
        let t = convergence_table(&bern(IndependenceKind::Free, 4), &[1, 2, 4, 8]).unwrap();
        // error = (m4 - 2)/N = -1/N
        for r in t.finite_rows() {
            let e = r.error.as_ref().unwrap().as_scalar().unwrap().clone();
            assert_eq!(e, Scalar::real(rat(-1, r.size.unwrap() as i64)));
        }
        assert!((t.rate_constant() - 1.0).abs() < 1e-12);
        assert!(convergence_table(&bern(IndependenceKind::Free, 4), &[4, 2]).is_err());
        assert!(convergence_table(&bern(IndependenceKind::Free, 4), &[]).is_err());
    }

    #[test]
    fn problem_validation() {
        let skew = SiteDistribution::single_label(&[Scalar::from_ratio(1, 2), int(1)]);
        assert!(CltProblem::single_label(IndependenceKind::Free, skew, 2).is_err());
        assert!(CltProblem::single_label(IndependenceKind::Free, SiteDistribution::standard_pair(), 0).is_err());
        let p = bern(IndependenceKind::Tensor, 4);
        let short = CltProblem { dist: SiteDistribution::standard_pair(), ..p };
        assert!(matches!(finite_n_moment(&short, 2), Err(Error::MissingMoment(_))));
    }

    #[test]
    fn singleton_checks() {
        let centered = SiteDistribution::symmetric_bernoulli(5);
        for kind in IndependenceKind::ALL {
            assert!(check_singleton(kind, &centered, 5).unwrap().passed(), "{kind}");
        }
        let shifted = SiteDistribution::single_label(&[
            Scalar::from_ratio(1, 2),
            int(1),
            int(1),
            int(1),
            int(1),
        ]);
        let r = check_singleton(IndependenceKind::Boolean, &shifted, 5).unwrap();
        let w = r.witness.expect("boolean with m1 = 1/2 must fail");
        // first failure is the single letter; the spec's (1,2,1) also fails
        assert!(!w.value.is_zero());
        let aba = normalize_word(&Word::from_pattern(&[1, 2, 1], &[shifted.alphabet().label_at(0); 3]));
        let mut ev = MomentEvaluator::new(IndependenceKind::Boolean, &shifted);
        assert_eq!(ev.evaluate(&aba).unwrap(), Scalar::from_ratio(1, 8));
    }

    #[test]
    fn spreadability_and_exchangeability() {
        let d = SiteDistribution::symmetric_bernoulli(5);
        for kind in IndependenceKind::ALL {
            assert!(check_spreadability(kind, &d, 5).unwrap().passed(), "{kind}");
        }
        for kind in [IndependenceKind::Tensor, IndependenceKind::Free, IndependenceKind::Boolean] {
            assert!(check_exchangeability(kind, &d, 5).unwrap().passed(), "{kind}");
        }
        let r = check_exchangeability(IndependenceKind::Monotone, &d, 5).unwrap();
        let w = r.witness.expect("monotone is not exchangeable");
        assert_ne!(w.value, w.partner.unwrap().1);
    }

    #[test]
    fn bound_examples() {
        let d = SiteDistribution::symmetric_bernoulli(6);
        assert_eq!(check_bound(IndependenceKind::Boolean, &d, 4).unwrap().max_abs(), Some(rat(1, 1)));
        assert_eq!(check_bound(IndependenceKind::Tensor, &d, 6).unwrap().max_abs(), Some(rat(1, 1)));
        for kind in IndependenceKind::ALL {
            assert_eq!(check_bound(kind, &d, 1).unwrap().max_abs(), Some(rat(0, 1)));
        }
        let wide = SiteDistribution::single_label(&[int(0), int(2), int(0), int(5)]);
        let r = check_bound(IndependenceKind::Tensor, &wide, 4).unwrap();
        assert_eq!(r.render(), "5");
    }
}
