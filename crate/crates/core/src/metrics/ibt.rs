//! Implicit bias tests: how well the two target sets separate in the space.

use serde::Serialize;

use super::kmeans::{kmeans, KMeansConfig};
use super::svm::{RbfSvm, SvmConfig};
use crate::error::{Error, Result};
use crate::spec::{filter_to_vocab, BiasSpecification, FilteredSpec, TermSet};
use crate::store::EmbeddingSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IbtResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svm_accuracy: Option<f64>,
    pub n_terms: usize,
}

fn target_points<'a>(space: &'a EmbeddingSpace, filtered: &FilteredSpec) -> (Vec<&'a [f64]>, Vec<bool>) {
    let t1 = filtered.rows(TermSet::T1).unwrap_or(&[]);
    let t2 = filtered.rows(TermSet::T2).unwrap_or(&[]);
    let points = t1.iter().chain(t2).map(|&r| space.vector(r)).collect();
    let in_t1 = (0..t1.len() + t2.len()).map(|i| i < t1.len()).collect();
    (points, in_t1)
}

/// 2-means clustering accuracy under the better of the two cluster-to-set assignments.
pub fn ibt_cluster(space: &EmbeddingSpace, spec: &BiasSpecification, restarts: usize, seed: u64) -> Result<f64> {
    cluster_filtered(space, &filter_to_vocab(spec, space)?, restarts, seed)
}

pub(crate) fn cluster_filtered(
    space: &EmbeddingSpace,
    filtered: &FilteredSpec,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let (points, in_t1) = target_points(space, filtered);
    if points.len() < 2 {
        return Err(Error::metric("ibt_cluster", "needs at least 2 target terms"));
    }
    let cfg = KMeansConfig {
        restarts,
        seed,
        ..KMeansConfig::default()
    };
    let clustering = kmeans(&points, &cfg);
    let agree = clustering
        .labels
        .iter()
        .zip(&in_t1)
        .filter(|(&label, &t1)| (label == 0) == t1)
        .count();
    let n = points.len();
    Ok(agree.max(n - agree) as f64 / n as f64)
}

/// Leave-one-out accuracy of an RBF-kernel SVM separating T1 from T2.
///
/// `gamma` defaults to `1 / dim` when `None`.
pub fn ibt_svm(space: &EmbeddingSpace, spec: &BiasSpecification, gamma: Option<f64>, c: f64) -> Result<f64> {
    svm_filtered(space, &filter_to_vocab(spec, space)?, gamma, c)
}

pub(crate) fn svm_filtered(
    space: &EmbeddingSpace,
    filtered: &FilteredSpec,
    gamma: Option<f64>,
    c: f64,
) -> Result<f64> {
    let (points, in_t1) = target_points(space, filtered);
    let n1 = in_t1.iter().filter(|&&b| b).count();
    if n1 < 2 || points.len() - n1 < 2 {
        return Err(Error::metric("ibt_svm", "each target set needs at least 2 terms"));
    }
    let gamma = gamma.unwrap_or(1.0 / space.dim() as f64);
    if !(gamma > 0.0 && c > 0.0) {
        return Err(Error::metric("ibt_svm", "gamma and C must be positive"));
    }
    let cfg = SvmConfig::new(gamma, c);
    let labels: Vec<f64> = in_t1.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();

    let mut correct = 0usize;
    for held in 0..points.len() {
        let train_x: Vec<&[f64]> = (0..points.len()).filter(|&i| i != held).map(|i| points[i]).collect();
        let train_y: Vec<f64> = (0..points.len()).filter(|&i| i != held).map(|i| labels[i]).collect();
        let model = RbfSvm::train(&train_x, &train_y, &cfg);
        if model.predict(points[held]) == labels[held] {
            correct += 1;
        }
    }
    Ok(correct as f64 / points.len() as f64)
}
