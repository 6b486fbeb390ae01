//! The cross-validation suite behind `qclt verify`.
//!
//! Each check compares an engine result against an independently coded
//! closed form or a second computational route, and has a runtime budget.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::clt::{
    check_exchangeability, check_singleton, check_spreadability, convergence_table, limit_moment,
    q_limit_moment, CltProblem,
};
use crate::error::{Error, Result};
use crate::fock::qccr::{projection_report, qccr_build, qccr_check_relations, qccr_projections, qccr_reconstruct_gamma};
use crate::fock::{vacuum_moment, FockFlavor, LadderSpec, QParam};
use crate::moments::{IndependenceKind, SiteDistribution};
use crate::opvalued::{
    opvalued_limit_formula, opvalued_vacuum_moment, random_labels, random_observable_set, BScalar, BVector,
    ObservableBlocks, ObservableSet, OpFiniteNExpansion,
};
use crate::partitions::{
    crossing_number, for_each_ordered_set_partition, for_each_pair_partition, is_noncrossing,
};
use crate::poly::QPoly;
use crate::scalar::{binomial, factorial, rat, rational_to_f64, Rational, Scalar};

/// A deliberate bug, used to confirm that the suite catches regressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    CatalanOffByOne,
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "catalan-off-by-one" => Ok(Fault::CatalanOffByOne),
            _ => Err(Error::Parse(format!("unknown fault {s:?}"))),
        }
    }
}

/// Check names with their runtime budgets in seconds.
pub const CHECKS: [(&str, f64); 10] = [
    ("tensor-limit", 1.0),
    ("free-limit", 1.0),
    ("boolean-limit", 1.0),
    ("monotone-limit", 5.0),
    ("fock-cross", 10.0),
    ("finite-n", 60.0),
    ("hypotheses", 60.0),
    ("qccr", 10.0),
    ("opvalued", 120.0),
    ("partitions", 30.0),
];

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub only: Option<Vec<String>>,
    pub fault: Option<Fault>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<15} {:>8.3}s (budget {}s)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

type Outcome = std::result::Result<String, String>;

/// Runs the selected checks in a fixed order. Unknown names in `only` are an error.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(only) = &opts.only {
        for name in only {
            if !CHECKS.iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidArgument(format!(
                    "unknown check {name:?}; known: {}",
                    CHECKS.map(|c| c.0).join(", ")
                )));
            }
        }
    }
    let mut results = Vec::new();
    for (name, budget) in CHECKS {
        if opts.only.as_ref().is_some_and(|o| !o.iter().any(|n| n == name)) {
            continue;
        }
        results.push(run_check(name, budget, opts.fault));
    }
    Ok(VerifyReport { results })
}

pub fn run_check(name: &'static str, budget: f64, fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = match name {
        "tensor-limit" => tensor_limit(),
        "free-limit" => free_limit(fault),
        "boolean-limit" => boolean_limit(),
        "monotone-limit" => monotone_limit(),
        "fock-cross" => fock_cross(),
        "finite-n" => finite_n(),
        "hypotheses" => hypotheses(),
        "qccr" => qccr(),
        "opvalued" => opvalued(),
        "partitions" => partitions(),
        _ => Err(format!("no such check {name}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if passed && seconds > budget {
        passed = false;
        detail = format!("over budget: {detail}");
    }
    CheckResult { name, passed, detail, seconds, budget }
}

fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

fn single_limit(kind: IndependenceKind, n: usize) -> std::result::Result<Scalar, String> {
    let dist = SiteDistribution::standard_pair();
    let p = CltProblem::single_label(kind, dist, n).map_err(|e| e.to_string())?;
    limit_moment(&p).map_err(|e| e.to_string())
}

fn compare_even(
    kind: IndependenceKind,
    max_n: usize,
    oracle: impl Fn(usize) -> Rational,
) -> Outcome {
    let mut shown = Vec::new();
    for n in 1..=max_n {
        let got = single_limit(kind, n)?;
        let want = if n % 2 == 1 { Rational::zero() } else { oracle(n) };
        if got != Scalar::real(want.clone()) {
            return Err(format!("{kind} n={n}: got {got}, expected {want}"));
        }
        if n % 2 == 0 {
            shown.push(got.to_string());
        }
    }
    Ok(format!("even moments {}", shown.join(", ")))
}

fn tensor_limit() -> Outcome {
    compare_even(IndependenceKind::Tensor, 10, |n| {
        int(factorial(n as u64)) / (int(BigInt::from(2).pow(n as u32 / 2)) * int(factorial(n as u64 / 2)))
    })
}

fn free_limit(fault: Option<Fault>) -> Outcome {
    let shift = if fault == Some(Fault::CatalanOffByOne) { 1 } else { 0 };
    compare_even(IndependenceKind::Free, 10, |n| {
        let k = n as u64 / 2 + shift;
        int(binomial(2 * k, k)) / int(k + 1)
    })
}

fn boolean_limit() -> Outcome {
    compare_even(IndependenceKind::Boolean, 12, |_| Rational::one())
}

/// Arcsine moments by the recurrence `m_{2k} = m_{2k-2} (2k − 1) / k`.
fn monotone_limit() -> Outcome {
    compare_even(IndependenceKind::Monotone, 10, |n| {
        let mut m = Rational::one();
        for k in 1..=n / 2 {
            m = m * rat(2 * k as i64 - 1, k as i64);
        }
        m
    })
}

fn fock_cross() -> Outcome {
    use IndependenceKind::*;
    for kind in [Tensor, Free, Boolean] {
        let spec = LadderSpec::for_kind(kind).expect("exchangeable kinds have a Fock flavor");
        for n in (2..=12).step_by(2) {
            let fock = vacuum_moment(&spec, n);
            let limit = single_limit(kind, n)?;
            if fock.as_constant().map(Scalar::real) != Some(limit.clone()) {
                return Err(format!("{kind} n={n}: Fock {fock} vs limit {limit}"));
            }
        }
    }
    let q = LadderSpec::new(FockFlavor::QFock(QParam::Symbolic));
    for n in (0..=12).step_by(2) {
        let (fock, comb) = (vacuum_moment(&q, n), q_limit_moment(n));
        if fock != comb {
            return Err(format!("q-Fock n={n}: {fock} vs crossing sum {comb}"));
        }
    }
    Ok(format!("q-Fock n=10: {}", vacuum_moment(&q, 10)))
}

fn finite_n() -> Outcome {
    let sizes = [2u64, 4, 8, 16];
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for kind in IndependenceKind::ALL {
        for n in [4usize, 6] {
            let p = CltProblem::single_label(kind, SiteDistribution::symmetric_bernoulli(n), n)
                .map_err(|e| e.to_string())?;
            let table = convergence_table(&p, &sizes).map_err(|e| e.to_string())?;
            let errors: Vec<Rational> = table
                .finite_rows()
                .map(|r| r.error.as_ref().expect("finite rows carry errors").abs_squared())
                .collect();
            if kind == IndependenceKind::Tensor && n == 4 {
                for row in table.finite_rows() {
                    let size = row.size.expect("finite row");
                    let want = Scalar::real(int(3) - rat(2, size as i64));
                    if row.value.as_scalar() != Some(&want) {
                        return Err(format!("tensor n=4 N={size}: {} instead of 3 − 2/N", row.value));
                    }
                }
            }
            let mut ratios = Vec::new();
            for w in errors.windows(2) {
                if w[1] > w[0] {
                    failures.push(format!("{kind} n={n}: error increases"));
                }
                if w[1].is_zero() {
                    continue;
                }
                let r = (rational_to_f64(&w[0]) / rational_to_f64(&w[1])).sqrt();
                if !(1.8..=2.2).contains(&r) {
                    failures.push(format!("{kind} n={n}: ratio {r:.4} outside [1.8, 2.2]"));
                }
                ratios.push(format!("{r:.3}"));
            }
            notes.push(format!("{}{n} [{}]", kind.name(), ratios.join(" ")));
        }
    }
    if failures.is_empty() {
        Ok(format!("ratios {}", notes.join("; ")))
    } else {
        Err(failures.join("; "))
    }
}

fn hypotheses() -> Outcome {
    let dists = [
        ("bernoulli", SiteDistribution::symmetric_bernoulli(6)),
        (
            "semicircle",
            SiteDistribution::single_label(&[0, 1, 0, 2, 0, 5].map(Scalar::from_int)),
        ),
    ];
    let mut checked = 0usize;
    for (dname, dist) in &dists {
        for kind in IndependenceKind::ALL {
            let s = check_singleton(kind, dist, 6).map_err(|e| e.to_string())?;
            if let Some(w) = s.witness {
                return Err(format!("{kind}/{dname} singleton: {w}"));
            }
            let sp = check_spreadability(kind, dist, 6).map_err(|e| e.to_string())?;
            if let Some(w) = sp.witness {
                return Err(format!("{kind}/{dname} spreadability: {w}"));
            }
            checked += s.words_checked + sp.words_checked;
        }
    }
    let ex = check_exchangeability(IndependenceKind::Monotone, &dists[0].1, 4).map_err(|e| e.to_string())?;
    match ex.witness {
        Some(w) => Ok(format!("{checked} evaluations; monotone non-exchangeable: {w}")),
        None => Err("monotone passed exchangeability; expected a witness".into()),
    }
}

fn qccr() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for q in [rat(1, 4), rat(1, 2), rat(3, 4)] {
        let m = qccr_build(&q, 32).map_err(|e| e.to_string())?;
        let r = qccr_check_relations(&m);
        let interior = r.ccr_interior.max(r.commutation_interior);
        if interior > 1e-12 {
            return Err(format!("q={q}: interior residual {interior:e}"));
        }
        let proj = qccr_projections(&m, 6).map_err(|e| e.to_string())?;
        let rep = projection_report(&proj);
        if rep.idempotence > 1e-9 || rep.basis_error > 1e-9 {
            return Err(format!("q={q}: idempotence {:e}, basis error {:e}", rep.idempotence, rep.basis_error));
        }
        let rec = qccr_reconstruct_gamma(&m, &proj.e, 6).map_err(|e| e.to_string())?;
        if rec.norm_error > rec.tail_bound + 1e-9 {
            return Err(format!("q={q}: ‖Γ − Σ‖ = {:e} > {:e}", rec.norm_error, rec.tail_bound));
        }
        worst = (worst.0.max(interior), worst.1.max(rep.idempotence.max(rep.basis_error)), worst.2.max(rec.shift_error));
    }
    Ok(format!("residual {:.1e}, projections {:.1e}, shifts {:.1e}", worst.0, worst.1, worst.2))
}

fn opvalued() -> Outcome {
    let sizes = [2u64, 4, 8, 16];
    let mut words = 0usize;
    for seed in 0..100u64 {
        let set = random_observable_set(seed, 2, 2).map_err(|e| e.to_string())?;
        for n in 1..=8 {
            let labels = random_labels(&set, seed * 16 + n as u64, n);
            let obs = set.sequence(&labels);
            let fock = opvalued_vacuum_moment(&obs).map_err(|e| e.to_string())?;
            let formula = opvalued_limit_formula(&obs).map_err(|e| e.to_string())?;
            if fock != formula {
                return Err(format!("seed {seed} n={n}: vacuum {fock} vs formula {formula}"));
            }
            words += 1;
        }
        let labels = random_labels(&set, seed * 16, 4);
        let limit = opvalued_limit_formula(&set.sequence(&labels)).map_err(|e| e.to_string())?;
        let exp = OpFiniteNExpansion::new(&set, &labels).map_err(|e| e.to_string())?;
        let errors = sizes
            .iter()
            .map(|&s| Ok(&exp.at(s)?.coefficient - &limit))
            .collect::<Result<Vec<BScalar>>>()
            .map_err(|e| e.to_string())?;
        for (w, s) in errors.windows(2).zip(sizes) {
            if w[0] != w[1].scale(&int(2)) {
                return Err(format!("seed {seed}: error at N={} is not half the error at N={s}", 2 * s));
            }
        }
    }
    let scalar = boolean_scalar_set();
    let b = scalar.alphabet().label_at(0);
    for n in 1..=12 {
        let v = opvalued_vacuum_moment(&scalar.sequence(&vec![b; n])).map_err(|e| e.to_string())?;
        let want = if n % 2 == 0 { 1 } else { 0 };
        if v != BScalar::scalar(Scalar::from_int(want)) {
            return Err(format!("d=1 n={n}: {v}"));
        }
    }
    Ok(format!("{words} words on 100 instances; errors halve with N; d=1 moments match boolean"))
}

/// The `d = m = 1` observable with `β = γ = 1`, `δ = 0`.
pub fn boolean_scalar_set() -> ObservableSet {
    let one = || BScalar::scalar(Scalar::one());
    let alphabet = crate::moments::Alphabet::single();
    let b = ObservableBlocks {
        label: alphabet.label_at(0),
        alpha: BScalar::zeros(1),
        beta: BVector::new(vec![one()]).expect("rank 1"),
        gamma: BVector::new(vec![one()]).expect("rank 1"),
        delta: vec![vec![BScalar::zeros(1)]],
    };
    ObservableSet::new(alphabet, vec![b]).expect("valid scalar observable")
}

fn partitions() -> Outcome {
    for n in 0..=12usize {
        let mut total = 0u64;
        let mut nc = 0u64;
        for_each_pair_partition(n, |p| {
            total += 1;
            if is_noncrossing(p) {
                nc += 1;
            }
        });
        let (want_total, want_nc) = if n % 2 == 1 {
            (0, 0)
        } else {
            let k = n / 2;
            let df: u64 = (1..=k as u64).map(|i| 2 * i - 1).product();
            (df, (binomial(2 * k as u64, k as u64) / BigInt::from(k + 1)).try_into().unwrap_or(0))
        };
        if (total, nc) != (want_total, want_nc) {
            return Err(format!("n={n}: {total} pairings / {nc} noncrossing, expected {want_total} / {want_nc}"));
        }
    }
    // Fubini numbers by the recurrence a(n) = Σ_k C(n, k) a(n − k)
    let mut fubini = vec![BigInt::one()];
    for n in 1..=8u64 {
        let v = (1..=n).map(|k| binomial(n, k) * &fubini[(n - k) as usize]).sum();
        fubini.push(v);
    }
    for n in 1..=8usize {
        let mut count = 0u64;
        for_each_ordered_set_partition(n, n, |_| count += 1);
        if BigInt::from(count) != fubini[n] {
            return Err(format!("n={n}: {count} ordered partitions, expected {}", fubini[n]));
        }
    }
    let mut census = [0u64; 4];
    for_each_pair_partition(6, |p| census[crossing_number(p)] += 1);
    if census != [5, 6, 3, 1] {
        return Err(format!("crossing census {census:?}"));
    }
    if q_limit_moment(6) != QPoly::from_ints(&[5, 6, 3, 1]) {
        return Err("q-limit n=6 disagrees with the census".into());
    }
    Ok("pairings, Catalan and Fubini counts match; census (5, 6, 3, 1)".into())
}
