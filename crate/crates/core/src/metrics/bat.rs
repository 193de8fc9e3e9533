//! Bias Analogy Test.
//!
//! For every `(t1, t2, a1, a2)` two queries are formed, `q1 = t1 - t2 + a2`
//! and `q2 = a1 - t1 + t2`. Attribute vectors of `A1 ∪ A2` are ranked by
//! Euclidean distance to each query. A comparison is favorable when `a1` is
//! strictly closer to `q1` than a distractor from `A2 \ {a2}`, or `a2` is
//! strictly closer to `q2` than a distractor from `A1 \ {a1}`. Ties are not
//! favorable.

use crate::error::{Error, Result};
use crate::numerics::dot;
use crate::spec::{filter_to_vocab, BiasSpecification, FilteredSpec, TermSet};
use crate::store::EmbeddingSpace;

pub fn bat(space: &EmbeddingSpace, spec: &BiasSpecification) -> Result<f64> {
    if !spec.is_explicit() {
        return Err(Error::IncompatibleMetric {
            metric: "bat".into(),
        });
    }
    bat_filtered(space, &filter_to_vocab(spec, space)?)
}

pub(crate) fn bat_filtered(space: &EmbeddingSpace, filtered: &FilteredSpec) -> Result<f64> {
    let missing = || Error::IncompatibleMetric {
        metric: "bat".into(),
    };
    let t1 = filtered.rows(TermSet::T1).ok_or_else(missing)?;
    let t2 = filtered.rows(TermSet::T2).ok_or_else(missing)?;
    let a1 = filtered.rows(TermSet::A1).ok_or_else(missing)?;
    let a2 = filtered.rows(TermSet::A2).ok_or_else(missing)?;
    if a1.len() < 2 || a2.len() < 2 {
        return Err(Error::metric(
            "bat",
            "each attribute set needs at least 2 terms so distractors exist",
        ));
    }

    // ||q - x||^2 = ||q||^2 + ||x||^2 - 2<q, x>; ||q||^2 is shared by all
    // candidates of a query, so candidates are compared on ||x||^2 - 2<q, x>.
    let attrs: Vec<usize> = a1.iter().chain(a2).copied().collect();
    let sq_norm: Vec<f64> = attrs.iter().map(|&r| dot(space.vector(r), space.vector(r))).collect();
    let gram = |rows: &[usize]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&r| attrs.iter().map(|&x| dot(space.vector(r), space.vector(x))).collect())
            .collect()
    };
    let (g_t1, g_t2, g_a) = (gram(t1), gram(t2), gram(&attrs));
    let n1 = a1.len();

    let mut favorable: u64 = 0;
    let mut total: u64 = 0;
    for gt1 in &g_t1 {
        for gt2 in &g_t2 {
            for i in 0..n1 {
                for j in 0..a2.len() {
                    let (ai, aj) = (i, n1 + j);
                    // q1 = t1 - t2 + a2
                    let key1 = |x: usize| sq_norm[x] - 2.0 * (gt1[x] - gt2[x] + g_a[aj][x]);
                    let target = key1(ai);
                    for d in 0..a2.len() {
                        if d == j {
                            continue;
                        }
                        total += 1;
                        if target < key1(n1 + d) {
                            favorable += 1;
                        }
                    }
                    // q2 = a1 - t1 + t2
                    let key2 = |x: usize| sq_norm[x] - 2.0 * (g_a[ai][x] - gt1[x] + gt2[x]);
                    let target = key2(aj);
                    for d in 0..n1 {
                        if d == i {
                            continue;
                        }
                        total += 1;
                        if target < key2(d) {
                            favorable += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(favorable as f64 / total as f64)
}
