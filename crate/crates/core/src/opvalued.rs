//! Operator-valued boolean central limits with scalars `B = M_d(ℚ[i])`.
//!
//! An observable acts on `B ⊕ E`, `E = B^m`, through the block matrix
//! `(α β*; γ δ)`, and its single-site moments are the vacuum compressions
//! `Φ₀(a) = ⟨ω, a ω⟩`. Copies at different sites are conditionally boolean
//! independent: a word splits into maximal same-site runs whose moments are
//! multiplied in order (B is noncommutative).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clt::NormalizedMoment;
use crate::error::{Error, Result};
use crate::moments::{normalize_word, Alphabet, Label, SiteDistribution, Word};
use crate::partitions::for_each_ordered_set_partition;
use crate::scalar::{binomial, rat, Rational, Scalar};

/// A `d × d` matrix over the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BScalar {
    dim: usize,
    entries: Vec<Scalar>,
}

impl BScalar {
    pub fn zeros(dim: usize) -> Self {
        BScalar { dim, entries: vec![Scalar::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = BScalar::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("B-scalars must be square and nonempty".into()));
        }
        Ok(BScalar { dim, entries: rows.into_iter().flatten().collect() })
    }

    pub fn scalar(value: Scalar) -> Self {
        BScalar { dim: 1, entries: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = BScalar::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        BScalar { dim: self.dim, entries: self.entries.iter().map(|x| x.scale(r)).collect() }
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Exact determinant by Gaussian elimination over `ℚ[i]`.
    pub fn det(&self) -> Scalar {
        let d = self.dim;
        let mut a = self.rows();
        let mut det = Scalar::one();
        for col in 0..d {
            let Some(pivot) = (col..d).find(|&r| !a[r][col].is_zero()) else {
                return Scalar::zero();
            };
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            let inv = a[col][col].inv().expect("nonzero pivot");
            det *= &a[col][col];
            for r in col + 1..d {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] * &inv;
                for c in col..d {
                    let t = &f * &a[col][c];
                    a[r][c] -= &t;
                }
            }
        }
        det
    }

    /// Exact positive-semidefiniteness of a Hermitian matrix: every principal
    /// minor is a nonnegative real.
    pub fn is_positive_semidefinite(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        let d = self.dim;
        (1u32..(1 << d)).all(|mask| {
            let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            let rows = idx.iter().map(|&i| idx.iter().map(|&j| self.get(i, j).clone()).collect()).collect();
            let minor = BScalar::from_rows(rows).expect("square").det();
            minor.is_real() && minor.re >= Rational::zero()
        })
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        self.entries.chunks(self.dim).map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }
}

impl fmt::Display for BScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.render().into_iter().map(|r| r.join(", ")).collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

impl Add for &BScalar {
    type Output = BScalar;
    fn add(self, o: &BScalar) -> BScalar {
        assert_eq!(self.dim, o.dim, "B-scalar dimension mismatch");
        BScalar { dim: self.dim, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &BScalar {
    type Output = BScalar;
    fn sub(self, o: &BScalar) -> BScalar {
        assert_eq!(self.dim, o.dim, "B-scalar dimension mismatch");
        BScalar { dim: self.dim, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &BScalar {
    type Output = BScalar;
    fn mul(self, o: &BScalar) -> BScalar {
        assert_eq!(self.dim, o.dim, "B-scalar dimension mismatch");
        let d = self.dim;
        let mut out = BScalar::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * d + j] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

/// An element of `E = B^m`: a column of `m` B-scalars.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BVector {
    pub entries: Vec<BScalar>,
}

impl BVector {
    pub fn new(entries: Vec<BScalar>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::DimensionMismatch("E must have rank m ≥ 1".into()));
        };
        if entries.iter().any(|e| e.dim() != first.dim()) {
            return Err(Error::DimensionMismatch("mixed B-scalar sizes in a vector".into()));
        }
        Ok(BVector { entries })
    }

    pub fn zeros(d: usize, m: usize) -> Self {
        BVector { entries: vec![BScalar::zeros(d); m] }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    /// `⟨x, y⟩ = Σ_i x_i* y_i`.
    pub fn inner(&self, other: &BVector) -> Result<BScalar> {
        if self.rank() != other.rank() || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of B^{} (d={}) with B^{} (d={})",
                self.rank(),
                self.dim(),
                other.rank(),
                other.dim()
            )));
        }
        let mut acc = BScalar::zeros(self.dim());
        for (x, y) in self.entries.iter().zip(&other.entries) {
            acc = &acc + &(&x.adjoint() * y);
        }
        Ok(acc)
    }

    /// Right module action `x · b`.
    pub fn right_mul(&self, b: &BScalar) -> BVector {
        BVector { entries: self.entries.iter().map(|x| x * b).collect() }
    }
}

/// An operator on `B ⊕ B^m` as a `(1+m) × (1+m)` array of B-scalars acting
/// by left multiplication on columns; index 0 is the vacuum summand `ωB`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockOperator {
    size: usize,
    dim: usize,
    blocks: Vec<BScalar>,
}

impl BlockOperator {
    pub fn zeros(d: usize, m: usize) -> Self {
        BlockOperator { size: m + 1, dim: d, blocks: vec![BScalar::zeros(d); (m + 1) * (m + 1)] }
    }

    pub fn identity(d: usize, m: usize) -> Self {
        let mut op = BlockOperator::zeros(d, m);
        for i in 0..=m {
            op.set(i, i, BScalar::identity(d));
        }
        op
    }

    pub fn rank(&self) -> usize {
        self.size - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, i: usize, j: usize) -> &BScalar {
        &self.blocks[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: BScalar) {
        self.blocks[i * self.size + j] = b;
    }

    /// `⟨ω, T ω⟩`, the upper-left block.
    pub fn vacuum_compression(&self) -> BScalar {
        self.block(0, 0).clone()
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = BlockOperator::zeros(self.dim, self.rank());
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(j, i, self.block(i, j).adjoint());
            }
        }
        out
    }

    fn check_compatible(&self, o: &BlockOperator) -> Result<()> {
        if self.size != o.size || self.dim != o.dim {
            return Err(Error::DimensionMismatch(format!(
                "block operators on B^{}⊕… (d={}) and B^{}⊕… (d={})",
                self.rank(),
                self.dim,
                o.rank(),
                o.dim
            )));
        }
        Ok(())
    }

    pub fn try_mul(&self, o: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(o)?;
        let s = self.size;
        let mut out = BlockOperator::zeros(self.dim, self.rank());
        for i in 0..s {
            for j in 0..s {
                let mut acc = BScalar::zeros(self.dim);
                for k in 0..s {
                    let a = self.block(i, k);
                    let b = o.block(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, o: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(o)?;
        Ok(BlockOperator {
            size: self.size,
            dim: self.dim,
            blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(BScalar::is_zero)
    }
}

/// `a*(x) = (0 0; x 0)`.
pub fn creator(x: &BVector) -> BlockOperator {
    let mut op = BlockOperator::zeros(x.dim(), x.rank());
    for (i, xi) in x.entries.iter().enumerate() {
        op.set(i + 1, 0, xi.clone());
    }
    op
}

/// `a(x) = a*(x)* = (0 x*; 0 0)`.
pub fn annihilator(x: &BVector) -> BlockOperator {
    creator(x).adjoint()
}

/// The GNS blocks `(α β*; γ δ)` of one generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableBlocks {
    pub label: Label,
    pub alpha: BScalar,
    pub beta: BVector,
    pub gamma: BVector,
    /// `m × m` array acting on `E`.
    pub delta: Vec<Vec<BScalar>>,
}

impl ObservableBlocks {
    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn rank(&self) -> usize {
        self.beta.rank()
    }

    pub fn validate(&self) -> Result<()> {
        let (d, m) = (self.dim(), self.rank());
        let ok = self.beta.dim() == d
            && self.gamma.dim() == d
            && self.gamma.rank() == m
            && self.delta.len() == m
            && self.delta.iter().all(|r| r.len() == m && r.iter().all(|b| b.dim() == d));
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("inconsistent blocks for label {}", self.label.id)))
        }
    }

    pub fn is_centered(&self) -> bool {
        self.alpha.is_zero()
    }

    /// The blocks of `b^{(j)*} = b^{(j')}`: `(α* γ*; β δ*)`.
    pub fn adjoint(&self) -> Self {
        let m = self.rank();
        let delta = (0..m).map(|i| (0..m).map(|j| self.delta[j][i].adjoint()).collect()).collect();
        ObservableBlocks {
            label: self.label.adjoint_label(),
            alpha: self.alpha.adjoint(),
            beta: self.gamma.clone(),
            gamma: self.beta.clone(),
            delta,
        }
    }

    /// The full action `(α β*; γ δ)` on `B ⊕ E`.
    pub fn full_operator(&self) -> BlockOperator {
        let m = self.rank();
        let mut op = BlockOperator::zeros(self.dim(), m);
        op.set(0, 0, self.alpha.clone());
        for i in 0..m {
            op.set(0, i + 1, self.beta.entries[i].adjoint());
            op.set(i + 1, 0, self.gamma.entries[i].clone());
            for j in 0..m {
                op.set(i + 1, j + 1, self.delta[i][j].clone());
            }
        }
        op
    }

    /// `a*(γ) + a(β)`, the limit realization on the boolean Fock module.
    pub fn fock_field(&self) -> BlockOperator {
        creator(&self.gamma)
            .try_add(&annihilator(&self.beta))
            .expect("blocks share dimensions")
    }
}

fn check_sequence(obs: &[ObservableBlocks]) -> Result<(usize, usize)> {
    let Some(first) = obs.first() else {
        return Err(Error::InvalidArgument("empty observable sequence".into()));
    };
    let (d, m) = (first.dim(), first.rank());
    for o in obs {
        o.validate()?;
        if o.dim() != d || o.rank() != m {
            return Err(Error::DimensionMismatch(format!(
                "observable {} lives on d={}, m={} but the first on d={d}, m={m}",
                o.label.id,
                o.dim(),
                o.rank()
            )));
        }
    }
    Ok((d, m))
}

/// `⟨β^{(j_1)}, γ^{(j_2)}⟩ ⋯ ⟨β^{(j_{n-1})}, γ^{(j_n)}⟩` for even `n`, zero for odd `n`.
pub fn opvalued_limit_formula(obs: &[ObservableBlocks]) -> Result<BScalar> {
    let (d, _) = check_sequence(obs)?;
    if obs.iter().any(|o| !o.is_centered()) {
        return Err(Error::InvalidArgument("observables must be centered (α = 0)".into()));
    }
    if obs.len() % 2 == 1 {
        return Ok(BScalar::zeros(d));
    }
    let mut acc = BScalar::identity(d);
    for pair in obs.chunks(2) {
        acc = &acc * &pair[0].beta.inner(&pair[1].gamma)?;
    }
    Ok(acc)
}

/// `⟨ω, Π_k (a*(γ^{(j_k)}) + a(β^{(j_k)})) ω⟩` on the boolean Fock module.
pub fn opvalued_vacuum_moment(obs: &[ObservableBlocks]) -> Result<BScalar> {
    let (d, m) = check_sequence(obs)?;
    let mut acc = BlockOperator::identity(d, m);
    for o in obs {
        acc = acc.try_mul(&o.fock_field())?;
    }
    Ok(acc.vacuum_compression())
}

/// `Φ₀(b^{(j_1)} ⋯ b^{(j_k)})`: vacuum compression of the product of full block actions.
pub fn single_site_word_moment(obs: &[ObservableBlocks]) -> Result<BScalar> {
    let (d, m) = check_sequence(obs)?;
    let mut acc = BlockOperator::identity(d, m);
    for o in obs {
        acc = acc.try_mul(&o.full_operator())?;
    }
    Ok(acc.vacuum_compression())
}

/// Observables indexed by label, closed under the adjoint involution.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSet {
    alphabet: Alphabet,
    observables: Vec<ObservableBlocks>,
}

impl ObservableSet {
    /// `observables[i]` must carry label `i` of `alphabet`, be centered, and
    /// satisfy `blocks(j') = blocks(j)*`.
    pub fn new(alphabet: Alphabet, observables: Vec<ObservableBlocks>) -> Result<Self> {
        if observables.len() != alphabet.len() {
            return Err(Error::InvalidArgument(format!(
                "{} observables for {} labels",
                observables.len(),
                alphabet.len()
            )));
        }
        check_sequence(&observables)?;
        for (i, o) in observables.iter().enumerate() {
            if o.label != alphabet.label_at(i as u16) {
                return Err(Error::InvalidArgument(format!("observable {i} has the wrong label")));
            }
            if !o.is_centered() {
                return Err(Error::InvalidArgument(format!(
                    "observable {:?} is not centered",
                    alphabet.name(i as u16)
                )));
            }
            if observables[o.label.adjoint as usize] != o.adjoint() {
                return Err(Error::InvalidArgument(format!(
                    "blocks of {:?} are not the adjoint of its partner's",
                    alphabet.name(i as u16)
                )));
            }
        }
        Ok(ObservableSet { alphabet, observables })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn rank(&self) -> usize {
        self.observables[0].rank()
    }

    pub fn get(&self, label: Label) -> &ObservableBlocks {
        &self.observables[label.id as usize]
    }

    pub fn sequence(&self, labels: &[Label]) -> Vec<ObservableBlocks> {
        labels.iter().map(|&l| self.get(l).clone()).collect()
    }

    /// The scalar site distribution `w ↦ Φ₀(w)` when `d = 1`, for label-words
    /// up to `max_degree`.
    pub fn scalar_distribution(&self, max_degree: usize) -> Result<SiteDistribution> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch("scalar distribution needs d = 1".into()));
        }
        let mut dist = SiteDistribution::new(self.alphabet.clone());
        let labels: Vec<Label> = self.alphabet.labels().collect();
        let mut frontier: Vec<Vec<Label>> = vec![Vec::new()];
        for _ in 0..max_degree {
            let mut next = Vec::new();
            for w in &frontier {
                for &l in &labels {
                    let mut w2 = w.clone();
                    w2.push(l);
                    let v = single_site_word_moment(&self.sequence(&w2))?;
                    let ids: Vec<u16> = w2.iter().map(|l| l.id).collect();
                    dist.insert(&ids, v.get(0, 0).clone());
                    next.push(w2);
                }
            }
            frontier = next;
        }
        Ok(dist)
    }
}

/// `Φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})` as `N^{-n/2} Σ_b C(N, b) · sums[b]`.
#[derive(Clone, Debug)]
pub struct OpFiniteNExpansion {
    degree: usize,
    sums: Vec<BScalar>,
}

/// An exact B-valued moment, possibly carrying a factor `N^{-1/2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpNormalizedMoment {
    pub coefficient: BScalar,
    pub inv_sqrt: Option<u64>,
}

impl OpFiniteNExpansion {
    /// Boolean factorization over every ordered site pattern.
    pub fn new(set: &ObservableSet, labels: &[Label]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("label sequence is empty".into()));
        }
        let d = set.dim();
        let mut sums = vec![BScalar::zeros(d); n + 1];
        let mut run_cache: std::collections::HashMap<Vec<Label>, BScalar> = Default::default();
        let mut err = None;
        for_each_ordered_set_partition(n, n, |osp| {
            if err.is_some() {
                return;
            }
            let w: Word = normalize_word(&Word::from_pattern(osp.ranks(), labels));
            let mut acc = BScalar::identity(d);
            for letter in &w.letters {
                let run = match run_cache.get(&letter.labels) {
                    Some(v) => v.clone(),
                    None => match single_site_word_moment(&set.sequence(&letter.labels)) {
                        Ok(v) => {
                            run_cache.insert(letter.labels.clone(), v.clone());
                            v
                        }
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    },
                };
                if run.is_zero() {
                    return;
                }
                acc = &acc * &run;
            }
            let b = osp.num_blocks();
            sums[b] = &sums[b] + &acc;
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(OpFiniteNExpansion { degree: n, sums })
    }

    pub fn at(&self, size: u64) -> Result<OpNormalizedMoment> {
        if size == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let d = self.sums[0].dim();
        let mut raw = BScalar::zeros(d);
        for (b, s) in self.sums.iter().enumerate() {
            if !s.is_zero() {
                raw = &raw + &s.scale(&Rational::from_integer(binomial(size, b as u64)));
            }
        }
        let half = (self.degree / 2) as u32;
        let coefficient = raw.scale(&Rational::from_integer(BigInt::from(size).pow(half)).recip());
        if self.degree % 2 == 0 {
            return Ok(OpNormalizedMoment { coefficient, inv_sqrt: None });
        }
        // reuse the scalar folding rule for perfect squares
        let probe = NormalizedMoment::with_inv_sqrt(Scalar::one(), size);
        Ok(match probe.inv_sqrt {
            None => OpNormalizedMoment {
                coefficient: coefficient.scale(&probe.coefficient.re),
                inv_sqrt: None,
            },
            Some(_) => OpNormalizedMoment { coefficient, inv_sqrt: Some(size) },
        })
    }
}

pub fn opvalued_finite_n_moment(set: &ObservableSet, labels: &[Label], size: u64) -> Result<OpNormalizedMoment> {
    OpFiniteNExpansion::new(set, labels)?.at(size)
}

/// A random small Gaussian rational: numerators in `-3..=3`, denominators in `1..=3`.
fn random_scalar(rng: &mut ChaCha8Rng, complex: bool) -> Scalar {
    let part = |rng: &mut ChaCha8Rng| rat(rng.random_range(-3..=3), rng.random_range(1..=3));
    let re = part(rng);
    let im = if complex { part(rng) } else { Rational::zero() };
    Scalar::new(re, im)
}

fn random_bscalar(rng: &mut ChaCha8Rng, d: usize, complex: bool) -> BScalar {
    let rows = (0..d).map(|_| (0..d).map(|_| random_scalar(rng, complex)).collect()).collect();
    BScalar::from_rows(rows).expect("square")
}

fn random_bvector(rng: &mut ChaCha8Rng, d: usize, m: usize, complex: bool) -> BVector {
    BVector::new((0..m).map(|_| random_bscalar(rng, d, complex)).collect()).expect("m ≥ 1")
}

/// A seeded random instance with labels `a` (self-adjoint), `c` and `c*`
/// (an adjoint pair). Entries are complex unless `d = 1`.
pub fn random_observable_set(seed: u64, d: usize, m: usize) -> Result<ObservableSet> {
    if d == 0 || m == 0 {
        return Err(Error::DimensionMismatch("d and m must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let complex = d > 1;
    let alphabet = Alphabet::new(&[("a", "a"), ("c", "c*"), ("c*", "c")])?;
    let labels: Vec<Label> = alphabet.labels().collect();

    let beta = random_bvector(&mut rng, d, m, complex);
    let x: Vec<Vec<BScalar>> = (0..m).map(|_| (0..m).map(|_| random_bscalar(&mut rng, d, complex)).collect()).collect();
    // δ = X + X* keeps the self-adjoint observable self-adjoint
    let delta = (0..m)
        .map(|i| (0..m).map(|j| &x[i][j] + &x[j][i].adjoint()).collect())
        .collect();
    let a = ObservableBlocks { label: labels[0], alpha: BScalar::zeros(d), gamma: beta.clone(), beta, delta };

    let c = ObservableBlocks {
        label: labels[1],
        alpha: BScalar::zeros(d),
        beta: random_bvector(&mut rng, d, m, complex),
        gamma: random_bvector(&mut rng, d, m, complex),
        delta: (0..m).map(|_| (0..m).map(|_| random_bscalar(&mut rng, d, complex)).collect()).collect(),
    };
    let c_star = c.adjoint();
    ObservableSet::new(alphabet, vec![a, c, c_star])
}

/// A seeded random label sequence of length `n` over the set's alphabet.
pub fn random_labels(set: &ObservableSet, seed: u64, n: usize) -> Vec<Label> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let labels: Vec<Label> = set.alphabet().labels().collect();
    (0..n).map(|_| labels[rng.random_range(0..labels.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(v: i64) -> BScalar {
        BScalar::scalar(Scalar::from_int(v))
    }

    fn scalar_set() -> ObservableSet {
        let a = Alphabet::single();
        let b = ObservableBlocks {
            label: a.label_at(0),
            alpha: one_by_one(0),
            beta: BVector::new(vec![one_by_one(1)]).unwrap(),
            gamma: BVector::new(vec![one_by_one(1)]).unwrap(),
            delta: vec![vec![one_by_one(0)]],
        };
        ObservableSet::new(a, vec![b]).unwrap()
    }

    #[test]
    fn creator_and_annihilator_shapes() {
        let x = BVector::new(vec![one_by_one(1)]).unwrap();
        let c = creator(&x);
        assert_eq!(c.block(1, 0), &one_by_one(1));
        assert!(c.block(0, 0).is_zero() && c.block(0, 1).is_zero() && c.block(1, 1).is_zero());
        assert!(c.try_mul(&c).unwrap().is_zero());
        let set = random_observable_set(7, 2, 2).unwrap();
        let o = set.get(set.alphabet().label_at(1));
        // a(x) ω = 0 and a*(x) a*(y) = 0
        let ann = annihilator(&o.beta);
        assert!((0..=2).all(|i| ann.block(i, 0).is_zero()));
        assert!(creator(&o.beta).try_mul(&creator(&o.gamma)).unwrap().is_zero());
        // a(x) a*(y) ω = ω ⟨x, y⟩
        let prod = annihilator(&o.beta).try_mul(&creator(&o.gamma)).unwrap();
        assert_eq!(prod.block(0, 0), &o.beta.inner(&o.gamma).unwrap());
    }

    #[test]
    fn scalar_boolean_limit_is_one() {
        let set = scalar_set();
        let b = set.alphabet().label_at(0);
        for n in [2, 4, 6, 8] {
            let obs = set.sequence(&vec![b; n]);
            assert_eq!(opvalued_limit_formula(&obs).unwrap(), one_by_one(1));
            assert_eq!(opvalued_vacuum_moment(&obs).unwrap(), one_by_one(1));
        }
        let odd = set.sequence(&[b; 3]);
        assert!(opvalued_limit_formula(&odd).unwrap().is_zero());
        assert!(opvalued_vacuum_moment(&set.sequence(&[b])).unwrap().is_zero());
    }

    #[test]
    fn single_site_moments() {
        let set = random_observable_set(3, 2, 2).unwrap();
        let l: Vec<Label> = set.alphabet().labels().collect();
        assert!(single_site_word_moment(&set.sequence(&[l[1]])).unwrap().is_zero());
        let pair = single_site_word_moment(&set.sequence(&[l[1], l[0]])).unwrap();
        assert_eq!(pair, set.get(l[1]).beta.inner(&set.get(l[0]).gamma).unwrap());
        // without δ a triple product cannot return to the vacuum
        let mut no_delta = set.sequence(&[l[0], l[0], l[0]]);
        for o in &mut no_delta {
            for row in &mut o.delta {
                for b in row.iter_mut() {
                    *b = BScalar::zeros(2);
                }
            }
        }
        assert!(single_site_word_moment(&no_delta).unwrap().is_zero());
    }

    #[test]
    fn random_instances_are_involution_closed() {
        for seed in 0..10 {
            let set = random_observable_set(seed, 2, 2).unwrap();
            let l: Vec<Label> = set.alphabet().labels().collect();
            assert_eq!(set.get(l[2]), &set.get(l[1]).adjoint());
            assert_eq!(set.get(l[0]), &set.get(l[0]).adjoint());
        }
        assert_eq!(random_observable_set(5, 2, 2).unwrap(), random_observable_set(5, 2, 2).unwrap());
    }

    #[test]
    fn dimension_errors() {
        let small = random_observable_set(1, 1, 1).unwrap();
        let big = random_observable_set(1, 2, 2).unwrap();
        let l = small.alphabet().label_at(0);
        let mixed = vec![small.get(l).clone(), big.get(l).clone()];
        assert!(matches!(opvalued_vacuum_moment(&mixed), Err(Error::DimensionMismatch(_))));
        let x = BVector::zeros(1, 1);
        let y = BVector::zeros(1, 2);
        assert!(x.inner(&y).is_err());
        assert!(BScalar::from_rows(vec![vec![Scalar::zero()], vec![]]).is_err());
    }

    #[test]
    fn finite_n_pair_is_exact() {
        let set = random_observable_set(11, 2, 2).unwrap();
        let l: Vec<Label> = set.alphabet().labels().collect();
        let seq = [l[1], l[2]];
        let expect = set.get(l[1]).beta.inner(&set.get(l[2]).gamma).unwrap();
        for size in [1, 2, 5, 16] {
            let v = opvalued_finite_n_moment(&set, &seq, size).unwrap();
            assert_eq!(v.coefficient, expect);
        }
    }

    #[test]
    fn determinant_and_positivity() {
        let m = BScalar::from_rows(vec![
            vec![Scalar::from_int(2), "1+i".parse().unwrap()],
            vec!["1-i".parse().unwrap(), Scalar::from_int(1)],
        ])
        .unwrap();
        assert_eq!(m.det(), Scalar::zero());
        assert!(m.is_positive_semidefinite());
        let neg = BScalar::from_rows(vec![
            vec![Scalar::from_int(1), Scalar::from_int(2)],
            vec![Scalar::from_int(2), Scalar::from_int(1)],
        ])
        .unwrap();
        assert!(!neg.is_positive_semidefinite());
    }
}
