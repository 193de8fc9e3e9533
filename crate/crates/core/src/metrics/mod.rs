//! Bias and quality measures over an embedding space and a bias specification.

mod bat;
mod ect;
mod ibt;
pub mod kmeans;
mod sq;
pub mod svm;
mod weat;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::{filter_to_vocab, BiasSpecification, SetCoverage, TermSet};
use crate::store::EmbeddingSpace;

pub use bat::bat;
pub use ect::ect;
pub use ibt::{ibt_cluster, ibt_svm, IbtResult};
pub use sq::{semantic_quality, SimilarityDataset, SqResult};
pub use weat::{weat, WeatResult};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Weat,
    Ect,
    Bat,
    IbtCluster,
    IbtSvm,
    Sq,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Weat,
        Metric::Ect,
        Metric::Bat,
        Metric::IbtCluster,
        Metric::IbtSvm,
        Metric::Sq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Weat => "weat",
            Metric::Ect => "ect",
            Metric::Bat => "bat",
            Metric::IbtCluster => "ibt_cluster",
            Metric::IbtSvm => "ibt_svm",
            Metric::Sq => "sq",
        }
    }

    /// Every metric the specification supports: all of them for explicit
    /// specs, only the attribute-free ones for implicit specs.
    pub fn defaults_for(spec: &BiasSpecification) -> Vec<Metric> {
        Metric::ALL
            .into_iter()
            .filter(|m| spec.is_explicit() || !m.requires_explicit())
            .collect()
    }

    pub fn requires_explicit(self) -> bool {
        matches!(self, Metric::Weat | Metric::Ect | Metric::Bat)
    }

    /// Parses a comma-separated list. `ibt` expands to both IBT variants and
    /// `all` to every metric. Duplicates are dropped; order is canonical.
    pub fn parse_list(list: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "all" => out.extend(Metric::ALL),
                "ibt" => out.extend([Metric::IbtCluster, Metric::IbtSvm]),
                other => out.push(other.parse()?),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Metric {
                metric: s.to_string(),
                message: "unknown metric".into(),
            })
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub seed: u64,
    pub n_permutations: usize,
    pub kmeans_restarts: usize,
    /// RBF width; `None` means `1 / dim`.
    pub svm_gamma: Option<f64>,
    pub svm_c: f64,
    pub sq_datasets: Vec<SimilarityDataset>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            n_permutations: DEFAULT_PERMUTATIONS,
            kmeans_restarts: 10,
            svm_gamma: None,
            svm_c: 1.0,
            sq_datasets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub space: String,
    pub spec: String,
    pub explicit: bool,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weat: Option<WeatResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ibt: Option<IbtResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sq: Option<BTreeMap<String, SqResult>>,
    pub coverage: BTreeMap<TermSet, SetCoverage>,
}

/// Runs the selected metrics against one vocabulary-filtered view of `spec`.
pub fn evaluate(
    space: &EmbeddingSpace,
    spec: &BiasSpecification,
    metrics: &[Metric],
    options: &EvaluateOptions,
) -> Result<EvaluationReport> {
    if let Some(m) = metrics
        .iter()
        .find(|m| m.requires_explicit() && !spec.is_explicit())
    {
        return Err(Error::IncompatibleMetric {
            metric: m.to_string(),
        });
    }
    let mut metrics = metrics.to_vec();
    metrics.sort();
    metrics.dedup();

    let filtered = filter_to_vocab(spec, space)?;
    let tag = |m: Metric| move |e: Error| match e {
        e @ (Error::Metric { .. } | Error::IncompatibleMetric { .. }) => e,
        other => Error::metric(m.as_str(), other),
    };

    let mut report = EvaluationReport {
        space: space.name().to_string(),
        spec: spec.name().to_string(),
        explicit: spec.is_explicit(),
        metrics: metrics.clone(),
        weat: None,
        ect: None,
        bat: None,
        ibt: None,
        sq: None,
        coverage: filtered.coverage().clone(),
    };
    let n_targets = filtered.spec().t1().len() + filtered.spec().t2().len();

    for &m in &metrics {
        match m {
            Metric::Weat => {
                report.weat = Some(
                    weat::weat_filtered(space, &filtered, options.n_permutations, options.seed)
                        .map_err(tag(m))?,
                )
            }
            Metric::Ect => report.ect = Some(ect::ect_filtered(space, &filtered).map_err(tag(m))?),
            Metric::Bat => report.bat = Some(bat::bat_filtered(space, &filtered).map_err(tag(m))?),
            Metric::IbtCluster => {
                let acc = ibt::cluster_filtered(space, &filtered, options.kmeans_restarts, options.seed)
                    .map_err(tag(m))?;
                report
                    .ibt
                    .get_or_insert(IbtResult {
                        cluster_accuracy: None,
                        svm_accuracy: None,
                        n_terms: n_targets,
                    })
                    .cluster_accuracy = Some(acc);
            }
            Metric::IbtSvm => {
                let acc = ibt::svm_filtered(space, &filtered, options.svm_gamma, options.svm_c)
                    .map_err(tag(m))?;
                report
                    .ibt
                    .get_or_insert(IbtResult {
                        cluster_accuracy: None,
                        svm_accuracy: None,
                        n_terms: n_targets,
                    })
                    .svm_accuracy = Some(acc);
            }
            Metric::Sq => {
                let mut results = BTreeMap::new();
                for ds in &options.sq_datasets {
                    results.insert(ds.name.clone(), semantic_quality(space, ds).map_err(tag(m))?);
                }
                report.sq = Some(results);
            }
        }
    }
    Ok(report)
}
