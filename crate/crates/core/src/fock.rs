//! Fock-type ladder spaces as an independent route to the limit moments.
//!
//! The vacuum moment `⟨Ω, (a* + a)^n Ω⟩` on a one-mode Fock-type space only
//! depends on the squared norms of the down-steps: `a a*` at level `k-1` has
//! weight `w(k)`. Expanding the power gives a sum over Dyck paths of the
//! product of `w` at every down-step, which stays exact even for the Boson
//! space where the individual matrix entries are `√k`.

pub mod qccr;

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::moments::IndependenceKind;
use crate::poly::QPoly;
use crate::scalar::{parse_rational, rational_to_f64, Rational};

/// The deformation parameter of a q-Fock space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QParam {
    /// Keep `q` as a formal variable.
    Symbolic,
    Value(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FockFlavor {
    Full,
    Boson,
    Boolean,
    QFock(QParam),
}

impl FromStr for FockFlavor {
    type Err = Error;

    /// `full`, `boson`, `boolean`, `q` (symbolic) or `q=<rational>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "free" => Ok(FockFlavor::Full),
            "boson" | "tensor" | "symmetric" => Ok(FockFlavor::Boson),
            "boolean" => Ok(FockFlavor::Boolean),
            "q" => Ok(FockFlavor::QFock(QParam::Symbolic)),
            other => match other.strip_prefix("q=") {
                Some(v) => Ok(FockFlavor::QFock(QParam::Value(parse_rational(v)?))),
                None => Err(Error::Parse(format!("unknown Fock flavor {other:?}"))),
            },
        }
    }
}

impl fmt::Display for FockFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FockFlavor::Full => f.write_str("full"),
            FockFlavor::Boson => f.write_str("boson"),
            FockFlavor::Boolean => f.write_str("boolean"),
            FockFlavor::QFock(QParam::Symbolic) => f.write_str("q"),
            FockFlavor::QFock(QParam::Value(q)) => write!(f, "q={q}"),
        }
    }
}

/// Ladder data: the squared weight of each down-step by level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderSpec {
    pub flavor: FockFlavor,
}

impl LadderSpec {
    pub fn new(flavor: FockFlavor) -> Self {
        LadderSpec { flavor }
    }

    /// The Fock flavor whose vacuum law is the limit law of `kind`, if any.
    pub fn for_kind(kind: IndependenceKind) -> Option<Self> {
        match kind {
            IndependenceKind::Tensor => Some(LadderSpec::new(FockFlavor::Boson)),
            IndependenceKind::Free => Some(LadderSpec::new(FockFlavor::Full)),
            IndependenceKind::Boolean => Some(LadderSpec::new(FockFlavor::Boolean)),
            IndependenceKind::Monotone => None,
        }
    }

    /// `‖a* e_{k-1}‖²` for `k ≥ 1`: full 1, Boson `k`, boolean `1` then `0`,
    /// q-Fock `[k]_q = 1 + q + ... + q^{k-1}`.
    pub fn down_weight(&self, k: usize) -> QPoly {
        assert!(k >= 1, "levels start at 1");
        match &self.flavor {
            FockFlavor::Full => QPoly::one(),
            FockFlavor::Boson => QPoly::constant(Rational::from_integer(k.into())),
            FockFlavor::Boolean if k == 1 => QPoly::one(),
            FockFlavor::Boolean => QPoly::zero(),
            FockFlavor::QFock(QParam::Symbolic) => QPoly::q_integer(k),
            FockFlavor::QFock(QParam::Value(q)) => QPoly::constant(QPoly::q_integer(k).eval(q)),
        }
    }
}

/// `⟨Ω, (a* + a)^n Ω⟩` as a weighted Dyck-path sum.
///
/// `paths[level]` accumulates the weight of all partial paths ending at
/// `level`; a down-step from `level` multiplies by `down_weight(level)`.
pub fn vacuum_moment(spec: &LadderSpec, n: usize) -> QPoly {
    if n % 2 == 1 {
        return QPoly::zero();
    }
    let top = n / 2;
    let weights: Vec<QPoly> = (1..=top.max(1)).map(|k| spec.down_weight(k)).collect();
    let mut paths = vec![QPoly::zero(); top + 2];
    paths[0] = QPoly::one();
    for step in 0..n {
        let mut next = vec![QPoly::zero(); top + 2];
        // a path must be able to return to 0 in the remaining steps
        let remaining = n - step - 1;
        for level in 0..=top {
            if paths[level].is_zero() {
                continue;
            }
            if level < top && level + 1 <= remaining {
                next[level + 1] = &next[level + 1] + &paths[level];
            }
            if level > 0 {
                let w = &paths[level] * &weights[level - 1];
                next[level - 1] = &next[level - 1] + &w;
            }
        }
        paths = next;
    }
    paths.swap_remove(0)
}

/// Float cross-check: `⟨e_0, X^n e_0⟩` for the truncated matrix
/// `X = a* + a` with entries `√w(k)`, evaluated at a rational `q` if needed.
pub fn vacuum_moment_matrix(spec: &LadderSpec, n: usize, q: Option<&Rational>) -> Result<f64> {
    let dim = n / 2 + 2;
    let q = q.cloned();
    let weight = |k: usize| -> Result<f64> {
        let w = spec.down_weight(k);
        let v = match w.as_constant() {
            Some(c) => c,
            None => w.eval(q.as_ref().ok_or_else(|| {
                Error::InvalidArgument("symbolic q needs a value for the matrix route".into())
            })?),
        };
        Ok(rational_to_f64(&v))
    };
    let mut x = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let amp = weight(k)?.max(0.0).sqrt();
        x[(k, k - 1)] = amp;
        x[(k - 1, k)] = amp;
    }
    let mut v = nalgebra::DVector::<f64>::zeros(dim);
    v[0] = 1.0;
    for _ in 0..n {
        v = &x * v;
    }
    Ok(v[0])
}

/// Brute-force enumeration of every ±1 path of length `n` that starts and
/// ends at 0 and never goes negative.
pub fn dyck_paths(n: usize) -> Vec<Vec<bool>> {
    fn rec(n: usize, level: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if cur.len() == n {
            if level == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if level < n - cur.len() {
            cur.push(true);
            rec(n, level + 1, cur, out);
            cur.pop();
        }
        if level > 0 {
            cur.push(false);
            rec(n, level - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Path-by-path evaluation of the same sum as [`vacuum_moment`].
pub fn vacuum_moment_by_paths(spec: &LadderSpec, n: usize) -> QPoly {
    let mut total = QPoly::zero();
    for path in dyck_paths(n) {
        let mut level = 0usize;
        let mut weight = QPoly::one();
        for up in path {
            if up {
                level += 1;
            } else {
                weight = &weight * &spec.down_weight(level);
                level -= 1;
            }
        }
        total = &total + &weight;
    }
    total
}

/// `vacuum_moment` evaluated to a rational (symbolic `q` is rejected).
pub fn vacuum_moment_value(spec: &LadderSpec, n: usize) -> Result<Rational> {
    let p = vacuum_moment(spec, n);
    p.as_constant().ok_or_else(|| {
        Error::InvalidArgument(format!("vacuum moment depends on q: {p}"))
    })
}

/// `Σ` of the coefficients, i.e. the value at `q = 1`.
pub fn coefficient_sum(p: &QPoly) -> Rational {
    p.coeffs().iter().fold(Rational::zero(), |a, c| a + c)
}
