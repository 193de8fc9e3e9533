//! Word Embedding Association Test with a one-sided permutation test.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm};
use crate::spec::{filter_to_vocab, BiasSpecification, FilteredSpec, TermSet};
use crate::store::EmbeddingSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeatResult {
    /// Sum of associations over T1 minus the sum over T2.
    pub statistic: f64,
    /// Difference of per-set mean associations over the pooled sample
    /// standard deviation; `None` when that deviation is zero.
    pub effect_size: Option<f64>,
    pub p_value: f64,
    pub n_permutations_used: usize,
    pub exhaustive: bool,
}

fn unit_rows(space: &EmbeddingSpace, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .map(|&r| {
            let v = space.vector(r);
            let n = norm(v);
            if n == 0.0 {
                return Err(Error::ZeroNorm);
            }
            Ok(v.iter().map(|x| x / n).collect())
        })
        .collect()
}

/// `s(t, A1, A2)`: mean cosine to A1 minus mean cosine to A2, for each target row.
pub(crate) fn associations(
    space: &EmbeddingSpace,
    targets: &[usize],
    a1: &[usize],
    a2: &[usize],
) -> Result<Vec<f64>> {
    let (a1, a2) = (unit_rows(space, a1)?, unit_rows(space, a2)?);
    let mean_cos = |t: &[f64], attrs: &[Vec<f64>]| {
        attrs.iter().map(|a| dot(t, a).clamp(-1.0, 1.0)).sum::<f64>() / attrs.len() as f64
    };
    Ok(unit_rows(space, targets)?
        .iter()
        .map(|t| mean_cos(t, &a1) - mean_cos(t, &a2))
        .collect())
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Statistic of the split whose first group is `in_first` (sums in index order).
fn split_statistic(scores: &[f64], in_first: &[bool]) -> f64 {
    let mut first = 0.0;
    let mut second = 0.0;
    for (s, &f) in scores.iter().zip(in_first) {
        if f {
            first += s;
        } else {
            second += s;
        }
    }
    first - second
}

pub fn weat(
    space: &EmbeddingSpace,
    spec: &BiasSpecification,
    n_permutations: usize,
    seed: u64,
) -> Result<WeatResult> {
    if !spec.is_explicit() {
        return Err(Error::IncompatibleMetric {
            metric: "weat".into(),
        });
    }
    weat_filtered(space, &filter_to_vocab(spec, space)?, n_permutations, seed)
}

pub(crate) fn weat_filtered(
    space: &EmbeddingSpace,
    filtered: &FilteredSpec,
    n_permutations: usize,
    seed: u64,
) -> Result<WeatResult> {
    let rows = |s| {
        filtered.rows(s).ok_or_else(|| Error::IncompatibleMetric {
            metric: "weat".into(),
        })
    };
    let (t1, t2, a1, a2) = (rows(TermSet::T1)?, rows(TermSet::T2)?, rows(TermSet::A1)?, rows(TermSet::A2)?);
    if n_permutations == 0 {
        return Err(Error::metric("weat", "n_permutations must be positive"));
    }

    let mut targets = t1.to_vec();
    targets.extend_from_slice(t2);
    let scores = associations(space, &targets, a1, a2)?;
    let n = scores.len();
    let (s1, s2) = scores.split_at(t1.len());

    let observed_split: Vec<bool> = (0..n).map(|i| i < t1.len()).collect();
    let statistic = split_statistic(&scores, &observed_split);

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let pooled_mean = mean(&scores);
    let var = scores.iter().map(|s| (s - pooled_mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let effect_size = (sd > 0.0).then(|| (mean(s1) - mean(s2)) / sd);

    // first group gets the larger half when n is odd
    let k = n.div_ceil(2);
    let total = binomial(n, k);
    let exhaustive = total.is_some_and(|t| t <= n_permutations as u128);
    let mut in_first = vec![false; n];
    let mut exceed = 0usize;
    let mut used = 0usize;
    let mut tally = |subset: &mut dyn Iterator<Item = usize>, in_first: &mut Vec<bool>| {
        in_first.iter_mut().for_each(|f| *f = false);
        for i in subset {
            in_first[i] = true;
        }
        if split_statistic(&scores, in_first) > statistic {
            exceed += 1;
        }
        used += 1;
    };
    if exhaustive {
        for combo in (0..n).combinations(k) {
            tally(&mut combo.into_iter(), &mut in_first);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_permutations {
            let picked = sample(&mut rng, n, k);
            tally(&mut picked.into_iter(), &mut in_first);
        }
    }

    Ok(WeatResult {
        statistic,
        effect_size,
        p_value: exceed as f64 / used as f64,
        n_permutations_used: used,
        exhaustive,
    })
}
