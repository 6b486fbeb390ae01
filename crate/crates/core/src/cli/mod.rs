//! The `qclt` command line.

pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::clt::{
    check_bound, check_exchangeability, check_singleton, check_spreadability, convergence_table, limit_moment,
    q_limit_moment, CltProblem, HypothesisReport,
};
use crate::error::{Error, Result};
use crate::fock::qccr::{projection_report, qccr_build, qccr_check_relations, qccr_projections, qccr_reconstruct_gamma};
use crate::fock::{vacuum_moment, vacuum_moment_matrix, FockFlavor, LadderSpec, QParam};
use crate::moments::{IndependenceKind, Label, SiteDistribution};
use crate::opvalued::{
    opvalued_limit_formula, opvalued_vacuum_moment, random_labels, random_observable_set, ObservableSet,
    OpFiniteNExpansion,
};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, Rational};
use crate::verify::{run_verify, Fault, VerifyOptions};

use config::{DistributionSpec, OpvaluedSpec, ProblemSpec};
use output::{bscalar_approx, bscalar_exact, moment_fields, scalar_fields, Format, Report};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "qclt", version, about = "Exact moments and central limits for noncommutative independences")]
pub struct Cli {
    /// Emit the JSON document.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit the result rows as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Worker threads for partition sums (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Record wall-clock timings in the output.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Limit moments of the central sums.
    Limit(ProblemArgs),
    /// Finite-N moments with exact errors against the limit.
    #[command(name = "finite-n")]
    FiniteN(ProblemArgs),
    /// Crossing-weighted pair partition sums.
    Qlimit(ProblemArgs),
    /// Vacuum moments of a*+a on a Fock-type space.
    Fock(ProblemArgs),
    /// The truncated q²-CCR lab.
    Qccr(ProblemArgs),
    /// Operator-valued boolean moments on random or configured instances.
    Opvalued(ProblemArgs),
    /// Singleton, spreadability, exchangeability and bound checks.
    #[command(name = "check-hypotheses")]
    CheckHypotheses(ProblemArgs),
    /// Run the cross-validation suite.
    Verify(VerifyArgs),
    /// Run a TOML problem file.
    Run {
        file: PathBuf,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct ProblemArgs {
    /// tensor, free, boolean, monotone, q or opvalued-boolean; for `fock`, a flavor.
    #[arg(long)]
    pub kind: Option<String>,
    /// Degrees, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Sample sizes, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    pub sizes: Vec<u64>,
    /// Distribution file (TOML).
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Label sequence j_1,...,j_n.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Deformation parameter(s) as rationals.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Matrix size of the operator-valued scalars.
    #[arg(long)]
    pub d: Option<usize>,
    /// Rank of the module E = B^m.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct VerifyArgs {
    /// Run only these checks.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

/// A fully resolved request, from flags or from a problem file.
#[derive(Clone, Debug, Default)]
pub struct Request {
    pub command: String,
    pub kind: Option<String>,
    pub degrees: Vec<usize>,
    pub sizes: Vec<u64>,
    pub labels: Vec<String>,
    pub dist: Option<DistributionSpec>,
    pub dist_path: Option<String>,
    pub q: Vec<String>,
    pub depth: Option<usize>,
    pub k_max: Option<usize>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub opvalued: Option<OpvaluedSpec>,
    pub only: Vec<String>,
    pub fault: Option<String>,
}

impl Request {
    pub fn from_args(command: &str, a: ProblemArgs) -> Result<Self> {
        let dist = a.dist.as_deref().map(config::load_distribution).transpose()?;
        Ok(Request {
            command: command.to_string(),
            kind: a.kind,
            degrees: a.n,
            sizes: a.sizes,
            labels: a.labels,
            dist,
            dist_path: a.dist.map(|p| p.display().to_string()),
            q: a.q,
            depth: a.depth,
            k_max: a.k_max,
            seed: a.seed,
            d: a.d,
            m: a.m,
            ..Default::default()
        })
    }

    pub fn from_problem(p: ProblemSpec) -> Result<Self> {
        let mut r = Request {
            command: p.command,
            kind: p.kind,
            degrees: p.degrees.unwrap_or_default(),
            sizes: p.n_values.unwrap_or_default(),
            labels: p.labels.unwrap_or_default(),
            dist: p.distribution,
            seed: p.seed,
            ..Default::default()
        };
        if let Some(f) = p.fock {
            if r.kind.is_none() {
                r.kind = f.flavor;
            }
            r.q.extend(f.q);
        }
        if let Some(c) = p.qccr {
            r.q.extend(c.q);
            r.depth = c.depth;
            r.k_max = c.k_max;
        }
        if let Some(o) = p.opvalued {
            r.seed = r.seed.or(o.seed);
            r.d = o.d;
            r.m = o.m;
            if !o.observables.is_empty() {
                r.opvalued = Some(o);
            }
        }
        Ok(r)
    }

    fn degrees_or(&self, default: &[usize]) -> Vec<usize> {
        if self.degrees.is_empty() {
            default.to_vec()
        } else {
            self.degrees.clone()
        }
    }

    fn sizes_or(&self, default: &[u64]) -> Result<Vec<u64>> {
        let s = if self.sizes.is_empty() { default.to_vec() } else { self.sizes.clone() };
        if s.contains(&0) || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("--N values must be positive and strictly ascending".into()));
        }
        Ok(s)
    }

    fn single_q(&self) -> Result<Option<Rational>> {
        match self.q.as_slice() {
            [] => Ok(None),
            [q] => parse_rational(q).map(Some),
            _ => Err(Error::InvalidArgument("this command takes a single --q".into())),
        }
    }

    fn inputs(&self) -> Value {
        let mut m = Map::new();
        if let Some(k) = &self.kind {
            m.insert("kind".into(), json!(k));
        }
        if !self.degrees.is_empty() {
            m.insert("n".into(), json!(self.degrees));
        }
        if !self.sizes.is_empty() {
            m.insert("N".into(), json!(self.sizes));
        }
        if !self.labels.is_empty() {
            m.insert("labels".into(), json!(self.labels));
        }
        if let Some(p) = &self.dist_path {
            m.insert("dist".into(), json!(p));
        }
        if !self.q.is_empty() {
            m.insert("q".into(), json!(self.q));
        }
        for (key, v) in [("depth", self.depth), ("k_max", self.k_max), ("d", self.d), ("m", self.m)] {
            if let Some(v) = v {
                m.insert(key.into(), json!(v));
            }
        }
        if let Some(s) = self.seed {
            m.insert("seed".into(), json!(s));
        }
        if !self.only.is_empty() {
            m.insert("only".into(), json!(self.only));
        }
        Value::Object(m)
    }
}

/// What the engine computes for a `--kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KindChoice {
    Scalar(IndependenceKind),
    Q,
    OpvaluedBoolean,
}

fn parse_kind(kind: Option<&str>) -> Result<KindChoice> {
    let k = kind.ok_or_else(|| Error::InvalidArgument("--kind is required".into()))?;
    match k {
        "q" => Ok(KindChoice::Q),
        "opvalued-boolean" | "opvalued" => Ok(KindChoice::OpvaluedBoolean),
        other => other.parse().map(KindChoice::Scalar),
    }
}

/// The site distribution, defaulting to the symmetric coin up to `degree`.
fn distribution(req: &Request, degree: usize) -> Result<SiteDistribution> {
    match &req.dist {
        Some(d) => d.build(),
        None => Ok(SiteDistribution::symmetric_bernoulli(degree.max(2))),
    }
}

/// Problems for each requested degree, or the single `--labels` sequence.
fn problems(req: &Request, kind: IndependenceKind, default_degrees: &[usize]) -> Result<Vec<(CltProblem, String)>> {
    if req.labels.is_empty() {
        let degrees = req.degrees_or(default_degrees);
        let top = degrees.iter().copied().max().unwrap_or(2);
        let dist = distribution(req, top)?;
        let label = dist.alphabet().label_at(0);
        let name = dist.alphabet().name(0).to_string();
        degrees
            .iter()
            .map(|&n| {
                let p = CltProblem::new(kind, dist.clone(), vec![label; n])?;
                Ok((p, vec![name.as_str(); n].join(" ")))
            })
            .collect()
    } else {
        let dist = distribution(req, req.labels.len())?;
        let labels = req
            .labels
            .iter()
            .map(|n| dist.alphabet().label(n))
            .collect::<Result<Vec<Label>>>()?;
        Ok(vec![(CltProblem::new(kind, dist, labels)?, req.labels.join(" "))])
    }
}

fn row(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn limit_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("limit", req.inputs());
    match parse_kind(req.kind.as_deref())? {
        KindChoice::Scalar(kind) => {
            for (p, word) in problems(req, kind, &[2, 4, 6, 8])? {
                let v = limit_moment(&p)?;
                let mut r = row(vec![("n", json!(p.degree())), ("labels", json!(word)), ("N", json!("limit"))]);
                r.extend(scalar_fields("", &v));
                report.rows.push(r);
            }
        }
        KindChoice::Q => report.rows.extend(qlimit_rows(req)?),
        KindChoice::OpvaluedBoolean => return opvalued_cmd(req, "limit"),
    }
    Ok(report)
}

fn finite_n_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("finite-n", req.inputs());
    let kind = match parse_kind(req.kind.as_deref())? {
        KindChoice::Scalar(k) => k,
        KindChoice::OpvaluedBoolean => return opvalued_cmd(req, "finite-n"),
        KindChoice::Q => return Err(Error::InvalidArgument("finite-n has no q kind; use qlimit".into())),
    };
    let sizes = req.sizes_or(&[1, 2, 4, 8, 16])?;
    for (p, word) in problems(req, kind, &[4])? {
        let table = convergence_table(&p, &sizes)?;
        for r in &table.rows {
            let mut out = row(vec![
                ("n", json!(r.degree)),
                ("labels", json!(word)),
                ("N", r.size.map_or(json!("limit"), |s| json!(s))),
            ]);
            out.extend(moment_fields("", &r.value));
            if let Some(e) = &r.error {
                out.extend(moment_fields("error_", e));
            }
            report.rows.push(out);
        }
    }
    Ok(report)
}

fn qlimit_rows(req: &Request) -> Result<Vec<Map<String, Value>>> {
    let q = req.single_q()?;
    let mut rows = Vec::new();
    for n in req.degrees_or(&[2, 4, 6, 8]) {
        let poly = q_limit_moment(n);
        let mut r = row(vec![("n", json!(n)), ("N", json!("limit")), ("polynomial", json!(poly.to_string()))]);
        if let Some(q) = &q {
            let v = poly.eval(q);
            r.insert("q".into(), json!(format_rational(q)));
            r.insert("exact".into(), json!(format_rational(&v)));
            r.insert("approx".into(), json!(rational_to_f64(&v)));
        } else {
            r.insert("exact".into(), json!(poly.to_string()));
        }
        rows.push(r);
    }
    Ok(rows)
}

fn qlimit_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("qlimit", req.inputs());
    report.rows = qlimit_rows(req)?;
    Ok(report)
}

fn fock_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("fock", req.inputs());
    let q = req.single_q()?;
    let flavor: FockFlavor = match req.kind.as_deref().unwrap_or("full") {
        "q" => FockFlavor::QFock(q.clone().map_or(QParam::Symbolic, QParam::Value)),
        other => other.parse()?,
    };
    let spec = LadderSpec::new(flavor.clone());
    for n in req.degrees_or(&[2, 4, 6, 8]) {
        let poly = vacuum_moment(&spec, n);
        let mut r = row(vec![("n", json!(n)), ("flavor", json!(flavor.to_string()))]);
        match poly.as_constant() {
            Some(c) => {
                r.insert("exact".into(), json!(format_rational(&c)));
                r.insert("approx".into(), json!(rational_to_f64(&c)));
                r.insert("matrix_approx".into(), json!(vacuum_moment_matrix(&spec, n, q.as_ref())?));
            }
            None => {
                r.insert("exact".into(), json!(poly.to_string()));
            }
        }
        report.rows.push(r);
    }
    Ok(report)
}

fn qccr_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("qccr", req.inputs());
    let qs: Vec<Rational> = if req.q.is_empty() {
        vec![crate::scalar::rat(1, 2)]
    } else {
        req.q.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?
    };
    let depth = req.depth.unwrap_or(32);
    let k_max = req.k_max.unwrap_or(6);
    for q in qs {
        let m = qccr_build(&q, depth)?;
        let res = qccr_check_relations(&m);
        let proj = qccr_projections(&m, k_max)?;
        let rep = projection_report(&proj);
        let rec = qccr_reconstruct_gamma(&m, &proj.e, k_max)?;
        report.rows.push(row(vec![
            ("q", json!(format_rational(&q))),
            ("depth", json!(depth)),
            ("k_max", json!(k_max)),
            ("ccr_interior", json!(res.ccr_interior)),
            ("commutation_interior", json!(res.commutation_interior)),
            ("ccr_boundary", json!(res.ccr_boundary)),
            ("expected_boundary", json!(res.expected_boundary)),
            ("alpha_norm", json!(res.alpha_norm)),
            ("gamma_norm", json!(res.gamma_norm)),
            ("idempotence", json!(rep.idempotence)),
            ("monotonicity", json!(rep.monotonicity)),
            ("orthogonality", json!(rep.orthogonality)),
            ("basis_error", json!(rep.basis_error)),
            ("neumann_gap", json!(rep.neumann_gap)),
            ("reconstruction_error", json!(rec.norm_error)),
            ("tail_bound", json!(rec.tail_bound)),
            ("shift_error", json!(rec.shift_error)),
        ]));
    }
    Ok(report)
}

fn observable_set(req: &Request) -> Result<(ObservableSet, u64)> {
    let seed = req.seed.unwrap_or(0);
    let set = match &req.opvalued {
        Some(spec) => spec.build()?,
        None => random_observable_set(seed, req.d.unwrap_or(2), req.m.unwrap_or(2))?,
    };
    Ok((set, seed))
}

fn opvalued_cmd(req: &Request, command: &str) -> Result<Report> {
    let mut report = Report::new(command, req.inputs());
    let (set, seed) = observable_set(req)?;
    let sequences: Vec<Vec<Label>> = if req.labels.is_empty() {
        req.degrees_or(&[2, 4])
            .into_iter()
            .map(|n| random_labels(&set, seed.wrapping_mul(16).wrapping_add(n as u64), n))
            .collect()
    } else {
        vec![req.labels.iter().map(|n| set.alphabet().label(n)).collect::<Result<_>>()?]
    };
    let sizes = if command == "limit" { Vec::new() } else { req.sizes_or(&[2, 4, 8, 16])? };
    for labels in sequences {
        let n = labels.len();
        let word: Vec<&str> = labels.iter().map(|l| set.alphabet().name(l.id)).collect();
        let obs = set.sequence(&labels);
        let limit = opvalued_limit_formula(&obs)?;
        let vacuum = opvalued_vacuum_moment(&obs)?;
        let base = || row(vec![("n", json!(n)), ("labels", json!(word.join(" ")))]);
        if !sizes.is_empty() {
            let exp = OpFiniteNExpansion::new(&set, &labels)?;
            for &s in &sizes {
                let v = exp.at(s)?;
                let mut r = base();
                r.insert("N".into(), json!(s));
                r.insert("exact".into(), bscalar_exact(&v.coefficient, v.inv_sqrt));
                r.insert("approx".into(), bscalar_approx(&v.coefficient, v.inv_sqrt));
                // odd degrees have a zero limit, so the error is the value itself
                let err = if v.inv_sqrt.is_some() { v.coefficient.clone() } else { &v.coefficient - &limit };
                r.insert("error_exact".into(), bscalar_exact(&err, v.inv_sqrt));
                r.insert("error_approx".into(), bscalar_approx(&err, v.inv_sqrt));
                report.rows.push(r);
            }
        }
        let mut r = base();
        r.insert("N".into(), json!("limit"));
        r.insert("exact".into(), bscalar_exact(&limit, None));
        r.insert("approx".into(), bscalar_approx(&limit, None));
        r.insert("vacuum_agrees".into(), json!(vacuum == limit));
        report.rows.push(r);
    }
    Ok(report)
}

fn hypothesis_row(kind: IndependenceKind, check: &str, rep: &HypothesisReport) -> Map<String, Value> {
    row(vec![
        ("kind", json!(kind.name())),
        ("check", json!(check)),
        ("passed", json!(rep.passed())),
        ("words_checked", json!(rep.words_checked)),
        ("witness", json!(rep.witness.as_ref().map(|w| w.to_string()))),
    ])
}

fn hypotheses_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("check-hypotheses", req.inputs());
    let kinds: Vec<IndependenceKind> = match req.kind.as_deref() {
        None | Some("all") => IndependenceKind::ALL.to_vec(),
        Some(k) => vec![k.parse()?],
    };
    let n_max = req.degrees.iter().copied().max().unwrap_or(5);
    let dist = distribution(req, n_max)?;
    for kind in kinds {
        report.rows.push(hypothesis_row(kind, "singleton", &check_singleton(kind, &dist, n_max)?));
        report.rows.push(hypothesis_row(kind, "spreadability", &check_spreadability(kind, &dist, n_max)?));
        report.rows.push(hypothesis_row(kind, "exchangeability", &check_exchangeability(kind, &dist, n_max)?));
        let bound = check_bound(kind, &dist, n_max)?;
        report.rows.push(row(vec![
            ("kind", json!(kind.name())),
            ("check", json!("bound")),
            ("n", json!(n_max)),
            ("exact", json!(bound.render())),
            ("approx", json!(bound.max_abs_f64())),
            ("witness", json!(bound.witness.as_ref().map(|w| w.to_string()))),
        ]));
    }
    Ok(report)
}

fn verify_cmd(req: &Request) -> Result<Report> {
    let mut report = Report::new("verify", req.inputs());
    let fault = req.fault.as_deref().map(str::parse::<Fault>).transpose()?;
    let only = (!req.only.is_empty()).then(|| req.only.clone());
    let v = run_verify(&VerifyOptions { only, fault })?;
    for c in &v.results {
        report.rows.push(row(vec![
            ("check", json!(c.name)),
            ("passed", json!(c.passed)),
            ("seconds", json!(c.seconds)),
            ("budget", json!(c.budget)),
            ("detail", json!(c.detail)),
        ]));
    }
    report.failed = !v.passed();
    Ok(report)
}

pub fn execute(req: &Request) -> Result<Report> {
    match req.command.as_str() {
        "limit" => limit_cmd(req),
        "finite-n" => finite_n_cmd(req),
        "qlimit" => qlimit_cmd(req),
        "fock" => fock_cmd(req),
        "qccr" => qccr_cmd(req),
        "opvalued" => opvalued_cmd(req, "opvalued"),
        "check-hypotheses" => hypotheses_cmd(req),
        "verify" => verify_cmd(req),
        other => Err(Error::InvalidArgument(format!("unknown command {other:?}"))),
    }
}

fn request(command: Command) -> Result<Request> {
    match command {
        Command::Limit(a) => Request::from_args("limit", a),
        Command::FiniteN(a) => Request::from_args("finite-n", a),
        Command::Qlimit(a) => Request::from_args("qlimit", a),
        Command::Fock(a) => Request::from_args("fock", a),
        Command::Qccr(a) => Request::from_args("qccr", a),
        Command::Opvalued(a) => Request::from_args("opvalued", a),
        Command::CheckHypotheses(a) => Request::from_args("check-hypotheses", a),
        Command::Verify(v) => Ok(Request {
            command: "verify".into(),
            only: v.only,
            fault: v.inject_fault,
            ..Default::default()
        }),
        Command::Run { file } => Request::from_problem(config::load_problem(&file)?),
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const EVALUATION: i32 = 2;
    pub const VERIFICATION: i32 = 3;
}

/// Parses `args`, runs the command and writes to `out` / `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::INPUT,
            };
            let _ = if code == exit::OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let start = Instant::now();
    let result = request(cli.command).and_then(|req| match cli.jobs {
        Some(0) => Err(Error::InvalidArgument("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| execute(&req)),
        None => execute(&req),
    });
    match result {
        Ok(mut report) => {
            if cli.timings {
                report.timings.insert("total_seconds".into(), json!(start.elapsed().as_secs_f64()));
            }
            if let Err(e) = output::write(&report, format, out) {
                let _ = writeln!(err, "error: {e}");
                return exit::EVALUATION;
            }
            if report.failed {
                exit::VERIFICATION
            } else {
                exit::OK
            }
        }
        Err(e) => {
            let code = if e.is_input_error() { exit::INPUT } else { exit::EVALUATION };
            match format {
                Format::Json => {
                    let _ = writeln!(out, "{}", output::error_document(&e));
                }
                _ => {
                    let _ = writeln!(err, "error: {e}");
                }
            }
            code
        }
    }
}
