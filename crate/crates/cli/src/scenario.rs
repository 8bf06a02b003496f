use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use fglab_core::{ExtensionKind, FinAbGroup, LawKind, MPSeries, RingElem, RingTower};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FglAxioms,
    Nseries,
    Level,
    Quotient,
    Stagewise,
    CoherenceCoord,
    ThetaCheck,
    Rnorm,
    CoherenceTheta,
    CharInjectivity,
    Discriminant,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        write!(f, "{}", v.as_str().unwrap_or_default())
    }
}

/// One monic extension step, coefficients constant term first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub poly: Vec<String>,
    #[serde(default)]
    pub unramified: bool,
}

/// A single integer or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ints {
    One(i64),
    Many(Vec<i64>),
}

impl Ints {
    pub fn to_vec(&self) -> Vec<i64> {
        match self {
            Ints::One(n) => vec![*n],
            Ints::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub task: Task,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "D", default = "default_cap")]
    pub cap: usize,
    #[serde(default = "default_group")]
    pub group: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extensions: Vec<ExtensionSpec>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Multipliers for `nseries`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Ints>,
    /// Check `[m+n]` and `[mn]` for `|m|, |n| <= range`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<i64>,
    /// Coordinate `s(x1)` over the base ring; defaults to `x1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    /// Explicit unit series in `k` variables for `theta-check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Exponent in the discriminant identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Order of the first-stage subgroup for `stagewise`; defaults to `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    /// Expected values of outputs or certificates, keyed `outputs.<name>`
    /// or `certificates.<name>`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, serde_json::Value>,
}

fn default_cap() -> usize {
    10
}

fn default_group() -> String {
    "mult".into()
}

impl Scenario {
    pub fn new(task: Task, p: u64, n: u32) -> Self {
        Scenario {
            name: None,
            task,
            p,
            n,
            cap: default_cap(),
            group: default_group(),
            extensions: Vec::new(),
            a: None,
            k: None,
            psi: None,
            n_values: None,
            range: None,
            section: None,
            unit: None,
            m: None,
            b: None,
            expect: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("malformed scenario")
    }

    pub fn ring(&self) -> anyhow::Result<RingTower> {
        let mut ring = RingTower::base(self.p, self.n)?;
        for ext in &self.extensions {
            let poly = ext.poly.iter().map(|c| RingElem::parse(&ring, c)).collect::<fglab_core::Result<Vec<_>>>()?;
            let kind = if ext.unramified { ExtensionKind::Unramified } else { ExtensionKind::Ramified };
            ring = ring.extend(&poly, kind)?;
        }
        Ok(ring)
    }

    pub fn law_kind(&self) -> anyhow::Result<LawKind> {
        Ok(LawKind::from_str(&self.group)?)
    }

    pub fn group_a(&self) -> anyhow::Result<FinAbGroup> {
        match &self.a {
            Some(a) => Ok(a.parse()?),
            None => bail!("task {} needs a group A", self.task),
        }
    }

    pub fn theta_k(&self) -> anyhow::Result<usize> {
        match self.k {
            Some(k) if (1..=3).contains(&k) => Ok(k),
            Some(k) => bail!("k = {k} is outside 1..=3"),
            None => bail!("task {} needs k", self.task),
        }
    }

    /// The coordinate `s`, as an exact polynomial over `ring`.
    pub fn section(&self, ring: &RingTower) -> anyhow::Result<MPSeries> {
        let text = self.section.as_deref().unwrap_or("1 * x1");
        Ok(MPSeries::parse(ring, 1, None, text)?)
    }
}
