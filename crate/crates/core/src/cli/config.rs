//! TOML problem files and distribution files.
//!
//! A distribution file looks like
//!
//! ```toml
//! [adjoints]
//! c = "c*"
//!
//! [moments]
//! "c c*" = "1"
//! "c* c" = "1/2"
//! ```
//!
//! Labels not listed under `adjoints` are self-adjoint. Exact values are
//! always strings (`"p/q"`, `"1/2+3/4i"`). A problem file adds `command`,
//! `kind`, `degrees`, `N_values`, `labels` and the optional tables
//! `distribution`, `fock`, `qccr` and `opvalued`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::moments::{Alphabet, SiteDistribution};
use crate::opvalued::{BScalar, BVector, ObservableBlocks, ObservableSet};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub adjoints: BTreeMap<String, String>,
    #[serde(default)]
    pub moments: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    pub flavor: Option<String>,
    pub q: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QccrSpec {
    #[serde(default)]
    pub q: Vec<String>,
    pub depth: Option<usize>,
    pub k_max: Option<usize>,
}

/// `d × d` matrix of exact entries, row-major.
pub type MatrixSpec = Vec<Vec<String>>;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub label: String,
    pub adjoint: Option<String>,
    pub beta: Vec<MatrixSpec>,
    pub gamma: Vec<MatrixSpec>,
    pub delta: Vec<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OpvaluedSpec {
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub command: String,
    pub kind: Option<String>,
    pub degrees: Option<Vec<usize>>,
    #[serde(rename = "N_values")]
    pub n_values: Option<Vec<u64>>,
    pub labels: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub distribution: Option<DistributionSpec>,
    pub fock: Option<FockSpec>,
    pub qccr: Option<QccrSpec>,
    pub opvalued: Option<OpvaluedSpec>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    parse_toml(&read(path)?, &path.display().to_string())
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    parse_toml(text, "problem")
}

pub fn load_distribution(path: &Path) -> Result<DistributionSpec> {
    parse_toml(&read(path)?, &path.display().to_string())
}

fn scalar_at(s: &str, field: &str) -> Result<Scalar> {
    s.parse::<Scalar>().map_err(|_| Error::Parse(format!("{field}: invalid exact value {s:?}")))
}

impl DistributionSpec {
    /// Labels in name order, with the adjoint map closed under inversion.
    pub fn alphabet(&self) -> Result<Alphabet> {
        let mut adj: BTreeMap<String, String> = BTreeMap::new();
        for (a, b) in &self.adjoints {
            for (x, y) in [(a, b), (b, a)] {
                if let Some(prev) = adj.insert(x.clone(), y.clone()) {
                    if &prev != y {
                        return Err(Error::Parse(format!(
                            "adjoints.{x}: conflicting adjoints {prev:?} and {y:?}"
                        )));
                    }
                }
            }
        }
        for word in self.moments.keys() {
            for name in word.split_whitespace() {
                adj.entry(name.to_string()).or_insert_with(|| name.to_string());
            }
        }
        if adj.is_empty() {
            return Err(Error::Parse("distribution declares no labels".into()));
        }
        let entries: Vec<(String, String)> = adj.into_iter().collect();
        Alphabet::new(&entries)
    }

    pub fn build(&self) -> Result<SiteDistribution> {
        let mut dist = SiteDistribution::new(self.alphabet()?);
        for (word, value) in &self.moments {
            let field = format!("moments.{word:?}");
            let v = scalar_at(value, &field)?;
            dist.insert_named(word, v).map_err(|e| Error::Parse(format!("{field}: {e}")))?;
        }
        if let Some(w) = dist.hermitian_violation() {
            return Err(Error::InvalidArgument(format!(
                "moments are not hermitian at [{}]",
                dist.alphabet().render(&w)
            )));
        }
        Ok(dist)
    }
}

fn matrix(spec: &MatrixSpec, field: &str) -> Result<BScalar> {
    let rows = spec
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, s)| scalar_at(s, &format!("{field}[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    BScalar::from_rows(rows).map_err(|e| Error::DimensionMismatch(format!("{field}: {e}")))
}

fn vector(spec: &[MatrixSpec], field: &str) -> Result<BVector> {
    let entries = spec
        .iter()
        .enumerate()
        .map(|(i, m)| matrix(m, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    BVector::new(entries).map_err(|e| Error::DimensionMismatch(format!("{field}: {e}")))
}

impl OpvaluedSpec {
    /// Builds the observable set from explicit blocks. Labels whose adjoint
    /// has no blocks of its own get the adjoint blocks.
    pub fn build(&self) -> Result<ObservableSet> {
        let mut adj: BTreeMap<String, String> = BTreeMap::new();
        for o in &self.observables {
            let a = o.adjoint.clone().unwrap_or_else(|| o.label.clone());
            adj.insert(o.label.clone(), a.clone());
            adj.entry(a).or_insert_with(|| o.label.clone());
        }
        let entries: Vec<(String, String)> = adj.into_iter().collect();
        let alphabet = Alphabet::new(&entries)?;
        let mut blocks: Vec<Option<ObservableBlocks>> = vec![None; alphabet.len()];
        for (i, o) in self.observables.iter().enumerate() {
            let field = format!("opvalued.observables[{i}]");
            let label = alphabet.label(&o.label)?;
            let beta = vector(&o.beta, &format!("{field}.beta"))?;
            let gamma = vector(&o.gamma, &format!("{field}.gamma"))?;
            let delta = o
                .delta
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(c, m)| matrix(m, &format!("{field}.delta[{r}][{c}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let b = ObservableBlocks { label, alpha: BScalar::zeros(beta.dim()), beta, gamma, delta };
            b.validate().map_err(|e| Error::DimensionMismatch(format!("{field}: {e}")))?;
            blocks[label.id as usize] = Some(b);
        }
        for i in 0..blocks.len() {
            if blocks[i].is_none() {
                let partner = alphabet.label_at(i as u16).adjoint_label();
                blocks[i] = blocks[partner.id as usize].as_ref().map(ObservableBlocks::adjoint);
            }
        }
        let blocks = blocks
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse("opvalued.observables is empty".into()))?;
        ObservableSet::new(alphabet, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_round_trip() {
        let spec: DistributionSpec = toml::from_str(
            r#"
            [adjoints]
            c = "c*"
            [moments]
            "c c*" = "1"
            "c* c" = "1/2"
            "c" = "0"
            "c*" = "0"
            "#,
        )
        .unwrap();
        let d = spec.build().unwrap();
        assert_eq!(d.alphabet().len(), 2);
        assert_eq!(d.get_labels(&[d.alphabet().label("c*").unwrap(), d.alphabet().label("c").unwrap()]).unwrap(), Scalar::from_ratio(1, 2));
    }

    #[test]
    fn errors_name_the_field() {
        let spec: DistributionSpec = toml::from_str("[moments]\n\"b b\" = \"x/2\"\n").unwrap();
        let e = spec.build().unwrap_err().to_string();
        assert!(e.contains("moments.\"b b\""), "{e}");
        let e = parse_problem("command = \"limit\"\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("bogus") && e.contains("line 2"), "{e}");
        let bad: DistributionSpec = toml::from_str("[moments]\n\"c\" = \"i\"\n").unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn observables_from_blocks() {
        let spec: ProblemSpec = parse_problem(
            r#"
            command = "opvalued"
            [[opvalued.observables]]
            label = "b"
            beta = [[["1"]]]
            gamma = [[["1"]]]
            delta = [[[["0"]]]]
            "#,
        )
        .unwrap();
        let set = spec.opvalued.unwrap().build().unwrap();
        assert_eq!((set.dim(), set.rank()), (1, 1));
    }
}
