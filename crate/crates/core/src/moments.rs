//! Words in the generators `b_s^{(j)}` and their joint moments under the
//! built-in independences.
//!
//! A [`Word`] is a sequence of letters, each carrying a site `s` and a
//! label-word (the product of generators from that site). After
//! [`normalize_word`] consecutive letters always sit on different sites, and
//! every letter's label-word can be looked up in the [`SiteDistribution`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type LabelId = u16;

/// A generator label `j` together with the label `j'` of its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub id: LabelId,
    pub adjoint: LabelId,
}

impl Label {
    pub fn adjoint_label(self) -> Label {
        Label { id: self.adjoint, adjoint: self.id }
    }

    pub fn is_self_adjoint(self) -> bool {
        self.id == self.adjoint
    }
}

/// The finite index set `J` with names and its adjoint involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    adjoint: Vec<LabelId>,
}

impl Alphabet {
    /// `entries` are `(name, adjoint name)`; the adjoint map must be an involution.
    pub fn new<S: AsRef<str>>(entries: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = entries.iter().map(|(n, _)| n.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(char::is_whitespace) {
                return Err(Error::Parse(format!("invalid label name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::Parse(format!("duplicate label {n:?}")));
            }
        }
        let mut adjoint = Vec::with_capacity(names.len());
        for (name, adj) in entries {
            let pos = names.iter().position(|n| n == adj.as_ref()).ok_or_else(|| {
                Error::Parse(format!("adjoint {:?} of {:?} is not a label", adj.as_ref(), name.as_ref()))
            })?;
            adjoint.push(pos as LabelId);
        }
        for (i, &a) in adjoint.iter().enumerate() {
            if adjoint[a as usize] as usize != i {
                return Err(Error::InvalidArgument(format!(
                    "adjoint map is not an involution at {:?}",
                    names[i]
                )));
            }
        }
        Ok(Alphabet { names, adjoint })
    }

    /// A single self-adjoint label `b`.
    pub fn single() -> Self {
        Alphabet { names: vec!["b".into()], adjoint: vec![0] }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.names.len()).map(|i| self.label_at(i as LabelId))
    }

    pub fn label_at(&self, id: LabelId) -> Label {
        Label { id, adjoint: self.adjoint[id as usize] }
    }

    pub fn label(&self, name: &str) -> Result<Label> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.label_at(i as LabelId))
            .ok_or_else(|| Error::Parse(format!("unknown label {name:?}")))
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.names[id as usize]
    }

    /// Space-separated label names.
    pub fn render(&self, word: &[LabelId]) -> String {
        word.iter().map(|&l| self.name(l)).collect::<Vec<_>>().join(" ")
    }
}

/// One factor of a word: the product of the listed generators at one site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub site: u32,
    pub labels: Vec<Label>,
}

impl Letter {
    pub fn new(site: u32, label: Label) -> Self {
        Letter { site, labels: vec![label] }
    }

    /// `b_site^{(label)}` raised to `power`.
    pub fn power(site: u32, label: Label, power: usize) -> Self {
        Letter { site, labels: vec![label; power] }
    }

    fn label_ids(&self) -> Vec<LabelId> {
        self.labels.iter().map(|l| l.id).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    /// One letter per position: `sites[k]` carries `labels[k]`.
    pub fn from_pattern(sites: &[usize], labels: &[Label]) -> Self {
        debug_assert_eq!(sites.len(), labels.len());
        Word {
            letters: sites
                .iter()
                .zip(labels)
                .map(|(&s, &l)| Letter::new(s as u32, l))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Total number of generators.
    pub fn degree(&self) -> usize {
        self.letters.iter().map(|l| l.labels.len()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.letters.windows(2).all(|w| w[0].site != w[1].site)
            && self.letters.iter().all(|l| !l.labels.is_empty())
    }

    /// Applies `f` to every site.
    pub fn map_sites(&self, f: impl Fn(u32) -> u32) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|l| Letter { site: f(l.site), labels: l.labels.clone() })
                .collect(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "({},[", l.site)?;
            for (i, lab) in l.labels.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", lab.id)?;
            }
            f.write_str("])")?;
        }
        Ok(())
    }
}

/// Merges adjacent letters on the same site, keeping label order.
pub fn normalize_word(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.letters.len());
    for l in &w.letters {
        if l.labels.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.site == l.site => last.labels.extend_from_slice(&l.labels),
            _ => out.push(l.clone()),
        }
    }
    Word { letters: out }
}

/// Reverses the word and replaces each label by its adjoint.
pub fn word_adjoint(w: &Word) -> Word {
    Word {
        letters: w
            .letters
            .iter()
            .rev()
            .map(|l| Letter {
                site: l.site,
                labels: l.labels.iter().rev().map(|x| x.adjoint_label()).collect(),
            })
            .collect(),
    }
}

/// The single-site moment functional: label-word → exact scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteDistribution {
    alphabet: Alphabet,
    moments: HashMap<Vec<LabelId>, Scalar>,
}

impl SiteDistribution {
    pub fn new(alphabet: Alphabet) -> Self {
        SiteDistribution { alphabet, moments: HashMap::new() }
    }

    /// Single self-adjoint label with `moments[k - 1] = φ₀(b^k)`.
    pub fn single_label(moments: &[Scalar]) -> Self {
        let mut d = SiteDistribution::new(Alphabet::single());
        for (k, m) in moments.iter().enumerate() {
            d.insert(&vec![0; k + 1], m.clone());
        }
        d
    }

    /// Moments of the symmetric ±1 coin up to `max_degree`.
    pub fn symmetric_bernoulli(max_degree: usize) -> Self {
        let ms: Vec<Scalar> = (1..=max_degree)
            .map(|k| Scalar::from_int(if k % 2 == 0 { 1 } else { 0 }))
            .collect();
        SiteDistribution::single_label(&ms)
    }

    /// Centered single label with variance one and nothing else known.
    pub fn standard_pair() -> Self {
        SiteDistribution::single_label(&[Scalar::zero(), Scalar::one()])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn insert(&mut self, word: &[LabelId], value: Scalar) {
        self.moments.insert(word.to_vec(), value);
    }

    /// Inserts from space-separated label names.
    pub fn insert_named(&mut self, word: &str, value: Scalar) -> Result<()> {
        let ids = word
            .split_whitespace()
            .map(|n| self.alphabet.label(n).map(|l| l.id))
            .collect::<Result<Vec<_>>>()?;
        if ids.is_empty() {
            if value != Scalar::one() {
                return Err(Error::InvalidArgument("the empty moment is fixed to 1".into()));
            }
            return Ok(());
        }
        self.insert(&ids, value);
        Ok(())
    }

    pub fn get(&self, word: &[LabelId]) -> Result<Scalar> {
        if word.is_empty() {
            return Ok(Scalar::one());
        }
        self.moments
            .get(word)
            .cloned()
            .ok_or_else(|| Error::MissingMoment(self.alphabet.render(word)))
    }

    pub fn get_labels(&self, labels: &[Label]) -> Result<Scalar> {
        let ids: Vec<LabelId> = labels.iter().map(|l| l.id).collect();
        self.get(&ids)
    }

    pub fn max_degree(&self) -> usize {
        self.moments.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Stored entries in a fixed order (by length, then lexicographic).
    pub fn entries(&self) -> Vec<(Vec<LabelId>, Scalar)> {
        let mut v: Vec<_> = self.moments.iter().map(|(k, s)| (k.clone(), s.clone())).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// `φ₀(w*) = conj φ₀(w)` for every stored `w` whose adjoint is also stored.
    /// Returns the first violating label-word.
    pub fn hermitian_violation(&self) -> Option<Vec<LabelId>> {
        self.entries().into_iter().find_map(|(w, v)| {
            let adj: Vec<LabelId> = w.iter().rev().map(|&l| self.alphabet.adjoint[l as usize]).collect();
            match self.moments.get(&adj) {
                Some(a) if *a != v.conj() => Some(w),
                _ => None,
            }
        })
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_violation().is_none()
    }
}

/// The rule that computes mixed moments of different sites from `φ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndependenceKind {
    Tensor,
    Free,
    Boolean,
    Monotone,
}

impl IndependenceKind {
    pub const ALL: [IndependenceKind; 4] = [
        IndependenceKind::Tensor,
        IndependenceKind::Free,
        IndependenceKind::Boolean,
        IndependenceKind::Monotone,
    ];

    /// Invariant under every injective relabeling of sites, not only order-preserving ones.
    pub fn is_exchangeable(self) -> bool {
        !matches!(self, IndependenceKind::Monotone)
    }

    pub fn name(self) -> &'static str {
        match self {
            IndependenceKind::Tensor => "tensor",
            IndependenceKind::Free => "free",
            IndependenceKind::Boolean => "boolean",
            IndependenceKind::Monotone => "monotone",
        }
    }
}

impl fmt::Display for IndependenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndependenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tensor" => Ok(IndependenceKind::Tensor),
            "free" => Ok(IndependenceKind::Free),
            "boolean" => Ok(IndependenceKind::Boolean),
            "monotone" => Ok(IndependenceKind::Monotone),
            other => Err(Error::Parse(format!("unknown independence {other:?}"))),
        }
    }
}

type FreeKey = Vec<(u32, Vec<LabelId>)>;

/// Evaluates joint moments for one independence over one distribution.
///
/// Holds a memo table for the free recursion; use one evaluator per worker.
pub struct MomentEvaluator<'d> {
    kind: IndependenceKind,
    dist: &'d SiteDistribution,
    free_cache: HashMap<FreeKey, Scalar>,
}

impl<'d> MomentEvaluator<'d> {
    pub fn new(kind: IndependenceKind, dist: &'d SiteDistribution) -> Self {
        MomentEvaluator { kind, dist, free_cache: HashMap::new() }
    }

    pub fn kind(&self) -> IndependenceKind {
        self.kind
    }

    pub fn dist(&self) -> &'d SiteDistribution {
        self.dist
    }

    /// `φ(w)` for a normalized word.
    pub fn evaluate(&mut self, w: &Word) -> Result<Scalar> {
        if let Some(pair) = w.letters.windows(2).find(|p| p[0].site == p[1].site) {
            return Err(Error::NotNormalized(pair[0].site));
        }
        if w.is_empty() {
            return Ok(Scalar::one());
        }
        match self.kind {
            IndependenceKind::Tensor => self.tensor(w),
            IndependenceKind::Boolean => self.boolean(w),
            IndependenceKind::Free => {
                let key = canonical_free_key(w);
                self.free(key)
            }
            IndependenceKind::Monotone => self.monotone(w),
        }
    }

    /// Normalizes first, then evaluates.
    pub fn evaluate_raw(&mut self, w: &Word) -> Result<Scalar> {
        self.evaluate(&normalize_word(w))
    }

    fn tensor(&self, w: &Word) -> Result<Scalar> {
        let mut by_site: BTreeMap<u32, Vec<LabelId>> = BTreeMap::new();
        for l in &w.letters {
            by_site.entry(l.site).or_default().extend(l.labels.iter().map(|x| x.id));
        }
        let mut acc = Scalar::one();
        for labels in by_site.values() {
            let v = self.dist.get(labels)?;
            if v.is_zero() {
                return Ok(Scalar::zero());
            }
            acc *= &v;
        }
        Ok(acc)
    }

    fn boolean(&self, w: &Word) -> Result<Scalar> {
        let mut acc = Scalar::one();
        for l in &w.letters {
            let v = self.dist.get(&l.label_ids())?;
            if v.is_zero() {
                return Ok(Scalar::zero());
            }
            acc *= &v;
        }
        Ok(acc)
    }

    /// Centering recursion. With `a_i = φ₀(a_i) + a_i°` and the alternating
    /// centered product vanishing,
    /// `φ(a_1…a_k) = −Σ_{S ⊊ [k]} Π_{i∉S}(−φ₀(a_i)) · φ(Π_{i∈S} a_i)`.
    fn free(&mut self, key: FreeKey) -> Result<Scalar> {
        match key.len() {
            0 => return Ok(Scalar::one()),
            1 => return self.dist.get(&key[0].1),
            _ => {}
        }
        if let Some(v) = self.free_cache.get(&key) {
            return Ok(v.clone());
        }
        let k = key.len();
        let values = key
            .iter()
            .map(|(_, labels)| self.dist.get(labels))
            .collect::<Result<Vec<_>>>()?;
        // positions with vanishing moment can never be dropped from S
        let droppable: Vec<usize> = (0..k).filter(|&i| !values[i].is_zero()).collect();
        let mut total = Scalar::zero();
        // iterate over nonempty subsets of droppable positions (the dropped set)
        for mask in 1u32..(1u32 << droppable.len()) {
            let mut coeff = Scalar::one();
            let mut dropped = vec![false; k];
            for (bit, &i) in droppable.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    dropped[i] = true;
                    coeff *= &(-&values[i]);
                }
            }
            let mut rest: FreeKey = Vec::with_capacity(k);
            for (i, (site, labels)) in key.iter().enumerate() {
                if dropped[i] {
                    continue;
                }
                match rest.last_mut() {
                    Some(last) if last.0 == *site => last.1.extend_from_slice(labels),
                    _ => rest.push((*site, labels.clone())),
                }
            }
            let sub = self.free(canonicalize_sites(rest))?;
            total += &(&coeff * &sub);
        }
        let result = -total;
        self.free_cache.insert(key, result.clone());
        Ok(result)
    }

    /// Peak rule: a letter whose site exceeds both neighbours' sites (the word
    /// is padded with virtual sites 0) factors out as `φ₀` of its label-word.
    fn monotone(&self, w: &Word) -> Result<Scalar> {
        let mut letters: Vec<(u32, Vec<LabelId>)> =
            w.letters.iter().map(|l| (l.site, l.label_ids())).collect();
        let mut acc = Scalar::one();
        while !letters.is_empty() {
            let n = letters.len();
            let site = |i: usize| letters[i].0;
            let peak = (0..n)
                .find(|&i| {
                    let left = if i == 0 { 0 } else { site(i - 1) };
                    let right = if i + 1 == n { 0 } else { site(i + 1) };
                    site(i) > left && site(i) > right
                })
                .expect("the maximal site of a normalized word is always a peak");
            let (_, labels) = letters.remove(peak);
            let v = self.dist.get(&labels)?;
            if v.is_zero() {
                return Ok(Scalar::zero());
            }
            acc *= &v;
            if peak > 0 && peak < letters.len() && letters[peak - 1].0 == letters[peak].0 {
                let (_, tail) = letters.remove(peak);
                letters[peak - 1].1.extend(tail);
            }
        }
        Ok(acc)
    }
}

fn canonical_free_key(w: &Word) -> FreeKey {
    canonicalize_sites(w.letters.iter().map(|l| (l.site, l.label_ids())).collect())
}

/// Relabels sites by order of first occurrence (free moments only see site equality).
fn canonicalize_sites(mut key: FreeKey) -> FreeKey {
    let mut seen: Vec<u32> = Vec::new();
    for (site, _) in key.iter_mut() {
        let idx = match seen.iter().position(|s| s == site) {
            Some(i) => i,
            None => {
                seen.push(*site);
                seen.len() - 1
            }
        };
        *site = idx as u32 + 1;
    }
    key
}

/// One-shot evaluation of `φ(w)` for a normalized word.
pub fn evaluate_moment(kind: IndependenceKind, w: &Word, d: &SiteDistribution) -> Result<Scalar> {
    MomentEvaluator::new(kind, d).evaluate(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Label {
        Alphabet::single().label_at(0)
    }

    fn word(sites: &[usize]) -> Word {
        normalize_word(&Word::from_pattern(sites, &vec![b(); sites.len()]))
    }

    #[test]
    fn normalize_examples() {
        let w = normalize_word(&Word::from_pattern(&[1, 1, 2], &[b(), b(), b()]));
        assert_eq!(w.letters, vec![Letter::power(1, b(), 2), Letter::new(2, b())]);
        let alt = Word::from_pattern(&[1, 2, 1], &[b(), b(), b()]);
        assert_eq!(normalize_word(&alt), alt);
        assert!(normalize_word(&Word::default()).is_empty());
    }

    #[test]
    fn adjoint_examples() {
        let a = Alphabet::new(&[("j", "k"), ("k", "j"), ("s", "s")]).unwrap();
        let j = a.label("j").unwrap();
        let k = a.label("k").unwrap();
        let w = Word::new(vec![Letter::new(1, j), Letter::new(2, k)]);
        let adj = word_adjoint(&w);
        assert_eq!(adj.letters, vec![Letter::new(2, j), Letter::new(1, k)]);
        let s = Word::new(vec![Letter::new(1, a.label("s").unwrap())]);
        assert_eq!(word_adjoint(&s), s);
        assert_eq!(word_adjoint(&adj), w);
    }

    #[test]
    fn alphabet_rejects_non_involution() {
        assert!(Alphabet::new(&[("a", "b"), ("b", "c"), ("c", "a")]).is_err());
        assert!(Alphabet::new(&[("a", "z")]).is_err());
        assert!(Alphabet::new(&[("a", "a"), ("a", "a")]).is_err());
    }

    #[test]
    fn single_letter_and_empty() {
        let d = SiteDistribution::standard_pair();
        for kind in IndependenceKind::ALL {
            assert_eq!(evaluate_moment(kind, &word(&[1]), &d).unwrap(), Scalar::zero());
            assert_eq!(evaluate_moment(kind, &Word::default(), &d).unwrap(), Scalar::one());
        }
    }

    #[test]
    fn hand_computed_examples() {
        let d = SiteDistribution::standard_pair();
        let alt = word(&[1, 2, 1, 2]);
        assert_eq!(evaluate_moment(IndependenceKind::Free, &alt, &d).unwrap(), Scalar::zero());
        assert_eq!(evaluate_moment(IndependenceKind::Boolean, &alt, &d).unwrap(), Scalar::zero());
        assert_eq!(evaluate_moment(IndependenceKind::Tensor, &alt, &d).unwrap(), Scalar::one());
        let blocks = word(&[1, 1, 2, 2]);
        assert_eq!(evaluate_moment(IndependenceKind::Boolean, &blocks, &d).unwrap(), Scalar::one());
        assert_eq!(evaluate_moment(IndependenceKind::Free, &blocks, &d).unwrap(), Scalar::one());
        assert_eq!(
            evaluate_moment(IndependenceKind::Monotone, &word(&[1, 2, 1]), &d).unwrap(),
            Scalar::zero()
        );
        // nested pairs: outer on site 1 with inner on site 2 is a peak, the reverse is not
        let d4 = SiteDistribution::symmetric_bernoulli(4);
        assert_eq!(
            evaluate_moment(IndependenceKind::Monotone, &word(&[1, 2, 2, 1]), &d4).unwrap(),
            Scalar::one()
        );
        assert_eq!(
            evaluate_moment(IndependenceKind::Monotone, &word(&[2, 1, 1, 2]), &d4).unwrap(),
            Scalar::zero()
        );
        // free: φ(b1 b2 b2 b1) = φ(b2²) φ(b1²)
        assert_eq!(
            evaluate_moment(IndependenceKind::Free, &word(&[2, 1, 1, 2]), &d4).unwrap(),
            Scalar::one()
        );
    }

    #[test]
    fn free_non_centered_two_site() {
        // for free a, b: φ(aba) = φ(a²)φ(b)
        let d = SiteDistribution::single_label(&[Scalar::from_ratio(1, 2), Scalar::from_int(3)]);
        let v = evaluate_moment(IndependenceKind::Free, &word(&[1, 2, 1]), &d).unwrap();
        assert_eq!(v, Scalar::from_ratio(3, 2));
        // φ(abab) = φ(a²)φ(b)² + φ(a)²φ(b²) − φ(a)²φ(b)²
        let v = evaluate_moment(IndependenceKind::Free, &word(&[1, 2, 1, 2]), &d).unwrap();
        let expect = Scalar::from_ratio(3, 4) + Scalar::from_ratio(3, 4) - Scalar::from_ratio(1, 16);
        assert_eq!(v, expect);
    }

    #[test]
    fn errors() {
        let d = SiteDistribution::standard_pair();
        let raw = Word::from_pattern(&[1, 1], &[b(), b()]);
        assert_eq!(evaluate_moment(IndependenceKind::Tensor, &raw, &d), Err(Error::NotNormalized(1)));
        let deep = word(&[1, 1, 1]);
        for kind in IndependenceKind::ALL {
            assert!(matches!(evaluate_moment(kind, &deep, &d), Err(Error::MissingMoment(_))));
        }
    }

    #[test]
    fn hermitian_detection() {
        let a = Alphabet::new(&[("j", "k"), ("k", "j")]).unwrap();
        let mut d = SiteDistribution::new(a);
        d.insert_named("j k", Scalar::from_int(1)).unwrap();
        d.insert_named("j j", "1+i".parse().unwrap()).unwrap();
        d.insert_named("k k", "1-i".parse().unwrap()).unwrap();
        assert!(d.is_hermitian());
        d.insert_named("k k", "1+i".parse().unwrap()).unwrap();
        assert!(!d.is_hermitian());
        assert!(d.insert_named("", Scalar::from_int(2)).is_err());
    }
}
