//! Embedding Coherence Test.

use crate::error::{Error, Result};
use crate::numerics::{cosine_similarity, spearman};
use crate::spec::{filter_to_vocab, BiasSpecification, FilteredSpec, TermSet};
use crate::store::EmbeddingSpace;

/// Spearman correlation between the attribute-similarity profiles of the two
/// target centroids. Lower values indicate more bias.
pub fn ect(space: &EmbeddingSpace, spec: &BiasSpecification) -> Result<f64> {
    if !spec.is_explicit() {
        return Err(Error::IncompatibleMetric {
            metric: "ect".into(),
        });
    }
    ect_filtered(space, &filter_to_vocab(spec, space)?)
}

fn centroid(space: &EmbeddingSpace, rows: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; space.dim()];
    for &r in rows {
        for (acc, x) in c.iter_mut().zip(space.vector(r)) {
            *acc += x;
        }
    }
    c.iter_mut().for_each(|x| *x /= rows.len() as f64);
    c
}

pub(crate) fn ect_filtered(space: &EmbeddingSpace, filtered: &FilteredSpec) -> Result<f64> {
    let missing = || Error::IncompatibleMetric {
        metric: "ect".into(),
    };
    let t1 = filtered.rows(TermSet::T1).ok_or_else(missing)?;
    let t2 = filtered.rows(TermSet::T2).ok_or_else(missing)?;
    let mut attrs: Vec<usize> = filtered.rows(TermSet::A1).ok_or_else(missing)?.to_vec();
    for &r in filtered.rows(TermSet::A2).ok_or_else(missing)? {
        if !attrs.contains(&r) {
            attrs.push(r);
        }
    }
    if attrs.len() < 2 {
        return Err(Error::metric("ect", "needs at least 2 distinct attribute terms"));
    }

    let (m1, m2) = (centroid(space, t1), centroid(space, t2));
    let mut sim1 = Vec::with_capacity(attrs.len());
    let mut sim2 = Vec::with_capacity(attrs.len());
    for &a in &attrs {
        let v = space.vector(a);
        sim1.push(cosine_similarity(v, &m1).map_err(|e| Error::metric("ect", e))?);
        sim2.push(cosine_similarity(v, &m2).map_err(|e| Error::metric("ect", e))?);
    }
    spearman(&sim1, &sim2).map_err(|e| Error::metric("ect", e))
}
