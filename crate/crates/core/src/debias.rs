//! Projection- and alignment-based debiasing.
//!
//! Both methods only need the target sets of a specification; attribute sets
//! of an explicit specification are ignored. Every output is a freshly
//! materialized space with the input's vocabulary and dimension.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, orthogonal_procrustes, top_singular_pair, fix_sign, Matrix};
use crate::spec::{filter_to_vocab, BiasSpecification, TermSet};
use crate::store::EmbeddingSpace;

/// Largest singular value of the pair-difference matrix, relative to the
/// largest target norm, below which no bias direction is considered to exist.
const DEGENERATE_DIRECTION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DebiasMethod {
    Gbdd,
    Bam,
}

impl DebiasMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DebiasMethod::Gbdd => "gbdd",
            DebiasMethod::Bam => "bam",
        }
    }

    /// Parses `gbdd`, `bam`, `gbdd-bam` or `bam-gbdd` into the stages to run, in order.
    pub fn parse_sequence(s: &str) -> Result<Vec<DebiasMethod>> {
        let seq = s
            .split('-')
            .map(str::parse)
            .collect::<Result<Vec<DebiasMethod>>>()?;
        validate_sequence(&seq)?;
        Ok(seq)
    }

    pub fn sequence_label(seq: &[DebiasMethod]) -> String {
        seq.iter().map(|m| m.as_str()).collect::<Vec<_>>().join("-")
    }
}

impl fmt::Display for DebiasMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DebiasMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gbdd" => Ok(DebiasMethod::Gbdd),
            "bam" => Ok(DebiasMethod::Bam),
            other => Err(Error::InvalidSequence(format!("unknown debiasing method {other:?}"))),
        }
    }
}

fn validate_sequence(seq: &[DebiasMethod]) -> Result<()> {
    match seq {
        [_] => Ok(()),
        [a, b] if a != b => Ok(()),
        [_, _] => Err(Error::InvalidSequence("a method may not repeat".into())),
        _ => Err(Error::InvalidSequence(format!(
            "expected 1 or 2 stages, got {}",
            seq.len()
        ))),
    }
}

/// Metadata of one debiasing stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageInfo {
    pub method: DebiasMethod,
    pub pairs_used: usize,
    /// Unit bias direction removed by a GBDD stage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_direction: Option<Vec<f64>>,
    /// Orthogonal map learned by a BAM stage, row-major.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Matrix>,
    /// Set when the target sets gave no usable direction and the stage left the space unchanged.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct DebiasResult {
    pub space: EmbeddingSpace,
    pub stages: Vec<StageInfo>,
}

impl DebiasResult {
    pub fn method_label(&self) -> String {
        DebiasMethod::sequence_label(&self.stages.iter().map(|s| s.method).collect::<Vec<_>>())
    }

    /// Direction of the last GBDD stage, if any.
    pub fn bias_direction(&self) -> Option<&[f64]> {
        self.stages.iter().rev().find_map(|s| s.bias_direction.as_deref())
    }

    /// Mapping of the last BAM stage, if any.
    pub fn mapping(&self) -> Option<&Matrix> {
        self.stages.iter().rev().find_map(|s| s.mapping.as_ref())
    }

    pub fn pairs_used(&self) -> usize {
        self.stages.first().map_or(0, |s| s.pairs_used)
    }

    pub fn metadata(&self) -> DebiasMetadata {
        DebiasMetadata {
            method: self.method_label(),
            space: self.space.name().to_string(),
            vocab_size: self.space.len(),
            dim: self.space.dim(),
            stages: self
                .stages
                .iter()
                .map(|s| StageSummary {
                    method: s.method,
                    pairs_used: s.pairs_used,
                    degenerate: s.degenerate,
                    direction_norm: s.bias_direction.as_deref().map(norm),
                    mapping_orthogonality_error: s.mapping.as_ref().map(Matrix::orthogonality_error),
                })
                .collect(),
            warnings: self
                .stages
                .iter()
                .filter(|s| s.degenerate)
                .map(|s| format!("{}: target differences vanish, stage left the space unchanged", s.method.as_str()))
                .collect(),
        }
    }
}

/// Compact, JSON-friendly summary of a debiasing run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DebiasMetadata {
    pub method: String,
    pub space: String,
    pub vocab_size: usize,
    pub dim: usize,
    pub stages: Vec<StageSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub method: DebiasMethod,
    pub pairs_used: usize,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_orthogonality_error: Option<f64>,
}

/// Target rows of all `(t1, t2)` cross pairs, left and right.
fn cross_pairs(space: &EmbeddingSpace, spec: &BiasSpecification) -> Result<(Vec<usize>, Vec<usize>)> {
    let filtered = filter_to_vocab(&spec.to_implicit(), space)?;
    let t1 = filtered.rows(TermSet::T1).expect("t1 always present");
    let t2 = filtered.rows(TermSet::T2).expect("t2 always present");
    let mut left = Vec::with_capacity(t1.len() * t2.len());
    let mut right = Vec::with_capacity(t1.len() * t2.len());
    for &a in t1 {
        for &b in t2 {
            left.push(a);
            right.push(b);
        }
    }
    Ok((left, right))
}

fn map_rows(space: &EmbeddingSpace, f: impl Fn(&[f64], &mut [f64]) + Sync) -> Matrix {
    let (rows, cols) = (space.len(), space.dim());
    let src = space.matrix().as_slice();
    let mut out = vec![0.0; rows * cols];
    if cols > 0 {
        out.par_chunks_mut(cols)
            .zip(src.par_chunks(cols))
            .for_each(|(dst, x)| f(x, dst));
    }
    Matrix::new(rows, cols, out).expect("shape preserved")
}

/// General bias direction debiasing: removes the top right singular
/// direction of the stacked pair differences `t1 - t2` from every vector.
pub fn gbdd(space: &EmbeddingSpace, spec: &BiasSpecification) -> Result<DebiasResult> {
    let (left, right) = cross_pairs(space, spec)?;
    let diffs: Vec<Vec<f64>> = left
        .iter()
        .zip(&right)
        .map(|(&a, &b)| space.vector(a).iter().zip(space.vector(b)).map(|(x, y)| x - y).collect())
        .collect();
    let scale = left
        .iter()
        .chain(&right)
        .map(|&r| norm(space.vector(r)))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let b = Matrix::from_rows(&diffs)?;
    let (sigma, mut direction) = top_singular_pair(&b);
    let name = format!("{}-gbdd", space.name());

    // negated so a NaN sigma also counts as degenerate
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(sigma > DEGENERATE_DIRECTION * scale) {
        return Ok(DebiasResult {
            space: space.clone().with_name(name),
            stages: vec![StageInfo {
                method: DebiasMethod::Gbdd,
                pairs_used: left.len(),
                bias_direction: None,
                mapping: None,
                degenerate: true,
            }],
        });
    }
    let n = norm(&direction);
    direction.iter_mut().for_each(|x| *x /= n);
    fix_sign(&mut direction);

    let matrix = map_rows(space, |x, dst| {
        let p = dot(x, &direction);
        for ((d, xi), bi) in dst.iter_mut().zip(x).zip(&direction) {
            *d = xi - p * bi;
        }
    });
    Ok(DebiasResult {
        space: space.with_matrix(name, matrix)?,
        stages: vec![StageInfo {
            method: DebiasMethod::Gbdd,
            pairs_used: left.len(),
            bias_direction: Some(direction),
            mapping: None,
            degenerate: false,
        }],
    })
}

/// Bias alignment model: learns the orthogonal map aligning T1 vectors with
/// their T2 pair partners and averages the space with its image,
/// `X' = (X + X W) / 2`.
pub fn bam(space: &EmbeddingSpace, spec: &BiasSpecification) -> Result<DebiasResult> {
    let (left, right) = cross_pairs(space, spec)?;
    let stack = |rows: &[usize]| Matrix::from_rows(&rows.iter().map(|&r| space.vector(r)).collect::<Vec<_>>());
    let w = orthogonal_procrustes(&stack(&left)?, &stack(&right)?)?;
    let d = space.dim();

    let matrix = map_rows(space, |x, dst| {
        dst.iter_mut().for_each(|v| *v = 0.0);
        for (k, &xk) in x.iter().enumerate() {
            for (o, wkj) in dst.iter_mut().zip(&w.as_slice()[k * d..(k + 1) * d]) {
                *o += xk * wkj;
            }
        }
        for (o, xi) in dst.iter_mut().zip(x) {
            *o = 0.5 * (xi + *o);
        }
    });
    Ok(DebiasResult {
        space: space.with_matrix(format!("{}-bam", space.name()), matrix)?,
        stages: vec![StageInfo {
            method: DebiasMethod::Bam,
            pairs_used: left.len(),
            bias_direction: None,
            mapping: Some(w),
            degenerate: false,
        }],
    })
}

/// Applies one or two distinct methods left to right, each re-deriving its
/// direction or mapping from the intermediate space.
pub fn compose(space: &EmbeddingSpace, spec: &BiasSpecification, sequence: &[DebiasMethod]) -> Result<DebiasResult> {
    validate_sequence(sequence)?;
    let mut current = space.clone();
    let mut stages = Vec::with_capacity(sequence.len());
    for &method in sequence {
        let step = match method {
            DebiasMethod::Gbdd => gbdd(&current, spec)?,
            DebiasMethod::Bam => bam(&current, spec)?,
        };
        stages.extend(step.stages);
        current = step.space;
    }
    let name = format!("{}-{}", space.name(), DebiasMethod::sequence_label(sequence));
    Ok(DebiasResult {
        space: current.with_name(name),
        stages,
    })
}
