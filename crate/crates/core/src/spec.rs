//! Bias specifications: two target sets and, for explicit specifications,
//! two attribute sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::EmbeddingSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermSet {
    T1,
    T2,
    A1,
    A2,
}

impl TermSet {
    pub const ALL: [TermSet; 4] = [TermSet::T1, TermSet::T2, TermSet::A1, TermSet::A2];

    pub fn as_str(self) -> &'static str {
        match self {
            TermSet::T1 => "t1",
            TermSet::T2 => "t2",
            TermSet::A1 => "a1",
            TermSet::A2 => "a2",
        }
    }
}

impl fmt::Display for TermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(T1, T2)` for an implicit specification, `(T1, T2, A1, A2)` for an explicit one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BiasSpecification {
    name: String,
    t1: Vec<String>,
    t2: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a1: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a2: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(default)]
    name: Option<String>,
    t1: Option<Vec<String>>,
    t2: Option<Vec<String>>,
    a1: Option<Vec<String>>,
    a2: Option<Vec<String>>,
}

fn normalize(set: TermSet, terms: Vec<String>) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let term = term.trim().to_lowercase();
        if term.is_empty() {
            return Err(Error::Spec(format!("set {set} contains an empty term")));
        }
        if term.chars().any(char::is_whitespace) {
            return Err(Error::Spec(format!("term {term:?} in {set} contains whitespace")));
        }
        if seen.insert(term.clone()) {
            out.push(term);
        }
    }
    if out.is_empty() {
        return Err(Error::Spec(format!("set {set} is empty")));
    }
    Ok(out)
}

impl BiasSpecification {
    /// Validates and normalizes (trim, lowercase, dedup) the given sets.
    pub fn new(
        name: impl Into<String>,
        t1: Vec<String>,
        t2: Vec<String>,
        attributes: Option<(Vec<String>, Vec<String>)>,
    ) -> Result<Self> {
        let (a1, a2) = match attributes {
            Some((a1, a2)) => (
                Some(normalize(TermSet::A1, a1)?),
                Some(normalize(TermSet::A2, a2)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            name: name.into(),
            t1: normalize(TermSet::T1, t1)?,
            t2: normalize(TermSet::T2, t2)?,
            a1,
            a2,
        })
    }

    pub fn implicit(name: &str, t1: &[&str], t2: &[&str]) -> Result<Self> {
        Self::new(name, owned(t1), owned(t2), None)
    }

    pub fn explicit(name: &str, t1: &[&str], t2: &[&str], a1: &[&str], a2: &[&str]) -> Result<Self> {
        Self::new(name, owned(t1), owned(t2), Some((owned(a1), owned(a2))))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn t1(&self) -> &[String] {
        &self.t1
    }

    pub fn t2(&self) -> &[String] {
        &self.t2
    }

    pub fn a1(&self) -> Option<&[String]> {
        self.a1.as_deref()
    }

    pub fn a2(&self) -> Option<&[String]> {
        self.a2.as_deref()
    }

    pub fn is_explicit(&self) -> bool {
        self.a1.is_some()
    }

    pub fn set(&self, set: TermSet) -> Option<&[String]> {
        match set {
            TermSet::T1 => Some(&self.t1),
            TermSet::T2 => Some(&self.t2),
            TermSet::A1 => self.a1(),
            TermSet::A2 => self.a2(),
        }
    }

    /// Present sets in canonical order.
    pub fn sets(&self) -> impl Iterator<Item = (TermSet, &[String])> {
        TermSet::ALL.into_iter().filter_map(|s| self.set(s).map(|t| (s, t)))
    }

    /// Drops the attribute sets.
    pub fn to_implicit(&self) -> Self {
        Self {
            name: self.name.clone(),
            t1: self.t1.clone(),
            t2: self.t2.clone(),
            a1: None,
            a2: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

fn owned(terms: &[&str]) -> Vec<String> {
    terms.iter().map(|s| s.to_string()).collect()
}

/// Parses the `{"name", "t1", "t2", "a1"?, "a2"?}` JSON schema.
pub fn parse_spec(json_text: &str) -> Result<BiasSpecification> {
    let raw: RawSpec =
        serde_json::from_str(json_text).map_err(|e| Error::Spec(format!("malformed JSON: {e}")))?;
    let t1 = raw.t1.ok_or_else(|| Error::Spec("missing t1".into()))?;
    let t2 = raw.t2.ok_or_else(|| Error::Spec("missing t2".into()))?;
    let attributes = match (raw.a1, raw.a2) {
        (Some(a1), Some(a2)) => Some((a1, a2)),
        (None, None) => None,
        (Some(_), None) => return Err(Error::Spec("a1 given without a2".into())),
        (None, Some(_)) => return Err(Error::Spec("a2 given without a1".into())),
    };
    BiasSpecification::new(raw.name.unwrap_or_else(|| "custom".into()), t1, t2, attributes)
}

const BUILTIN_SOURCES: [&str; 10] = [
    include_str!("../data/weat/weat1.json"),
    include_str!("../data/weat/weat2.json"),
    include_str!("../data/weat/weat3.json"),
    include_str!("../data/weat/weat4.json"),
    include_str!("../data/weat/weat5.json"),
    include_str!("../data/weat/weat6.json"),
    include_str!("../data/weat/weat7.json"),
    include_str!("../data/weat/weat8.json"),
    include_str!("../data/weat/weat9.json"),
    include_str!("../data/weat/weat10.json"),
];

/// The ten bundled WEAT tests, `weat1` through `weat10`.
pub fn builtin_specs() -> Vec<BiasSpecification> {
    BUILTIN_SOURCES
        .iter()
        .map(|src| parse_spec(src).expect("bundled specs are valid"))
        .collect()
}

pub fn builtin_spec(name: &str) -> Option<BiasSpecification> {
    builtin_specs().into_iter().find(|s| s.name() == name)
}

/// Name and set sizes of a specification, for listings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecSummary {
    pub name: String,
    pub explicit: bool,
    pub t1: usize,
    pub t2: usize,
    pub a1: usize,
    pub a2: usize,
}

impl BiasSpecification {
    pub fn summary(&self) -> SpecSummary {
        SpecSummary {
            name: self.name.clone(),
            explicit: self.is_explicit(),
            t1: self.t1.len(),
            t2: self.t2.len(),
            a1: self.a1().map_or(0, <[_]>::len),
            a2: self.a2().map_or(0, <[_]>::len),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetCoverage {
    pub retained: usize,
    pub total: usize,
    pub coverage: f64,
    pub dropped: Vec<String>,
}

/// A specification restricted to terms present in a particular space.
#[derive(Debug, Clone)]
pub struct FilteredSpec {
    spec: BiasSpecification,
    rows: BTreeMap<TermSet, Vec<usize>>,
    coverage: BTreeMap<TermSet, SetCoverage>,
}

impl FilteredSpec {
    /// The retained terms, in their original order.
    pub fn spec(&self) -> &BiasSpecification {
        &self.spec
    }

    /// Row indices of the retained terms of `set` in the space it was filtered against.
    pub fn rows(&self, set: TermSet) -> Option<&[usize]> {
        self.rows.get(&set).map(Vec::as_slice)
    }

    pub fn coverage(&self) -> &BTreeMap<TermSet, SetCoverage> {
        &self.coverage
    }

    pub fn dropped(&self, set: TermSet) -> &[String] {
        self.coverage.get(&set).map_or(&[], |c| c.dropped.as_slice())
    }
}

/// Keeps the terms that resolve in `space` (exact or lowercase match).
pub fn filter_to_vocab(spec: &BiasSpecification, space: &EmbeddingSpace) -> Result<FilteredSpec> {
    let mut rows = BTreeMap::new();
    let mut coverage = BTreeMap::new();
    let mut kept_terms: BTreeMap<TermSet, Vec<String>> = BTreeMap::new();

    for (set, terms) in spec.sets() {
        let mut kept = Vec::new();
        let mut idx = Vec::new();
        let mut dropped = Vec::new();
        for term in terms {
            match space.resolve(term) {
                Some((row, _)) => {
                    kept.push(term.clone());
                    idx.push(row);
                }
                None => dropped.push(term.clone()),
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyAfterFilter {
                set: set.to_string(),
            });
        }
        coverage.insert(
            set,
            SetCoverage {
                retained: kept.len(),
                total: terms.len(),
                coverage: kept.len() as f64 / terms.len() as f64,
                dropped,
            },
        );
        rows.insert(set, idx);
        kept_terms.insert(set, kept);
    }

    let mut take = |s| kept_terms.remove(&s);
    let spec = BiasSpecification {
        name: spec.name.clone(),
        t1: take(TermSet::T1).expect("t1 present"),
        t2: take(TermSet::T2).expect("t2 present"),
        a1: take(TermSet::A1),
        a2: take(TermSet::A2),
    };
    Ok(FilteredSpec {
        spec,
        rows,
        coverage,
    })
}
