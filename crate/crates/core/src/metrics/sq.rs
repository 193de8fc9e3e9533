//! Semantic quality: agreement between embedding cosines and human similarity ratings.

use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{cosine_similarity, spearman};
use crate::store::EmbeddingSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqResult {
    pub correlation: f64,
    pub pairs_used: usize,
    pub pairs_total: usize,
}

impl SimilarityDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> Self {
        Self {
            name: name.into(),
            pairs,
        }
    }

    /// Reads `word1 TAB word2 TAB score` lines; a first line whose score
    /// column is not numeric is taken as a header.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file), &name, &path.display().to_string())
    }

    pub fn read<R: BufRead>(reader: R, name: &str, source: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut first = true;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = if line.contains('\t') {
                line.split('\t').map(str::trim).collect()
            } else {
                line.split_whitespace().collect()
            };
            let parsed = (fields.len() >= 3)
                .then(|| fields[2].parse::<f64>().ok().filter(|s| s.is_finite()))
                .flatten();
            match parsed {
                Some(score) => pairs.push((fields[0].to_string(), fields[1].to_string(), score)),
                None if first => {}
                None => {
                    return Err(Error::Parse {
                        path: source.into(),
                        line: i + 1,
                        message: "expected word1<TAB>word2<TAB>score".into(),
                    })
                }
            }
            first = false;
        }
        Ok(Self::new(name, pairs))
    }
}

/// Spearman correlation of human scores with cosines over in-vocabulary pairs.
pub fn semantic_quality(space: &EmbeddingSpace, dataset: &SimilarityDataset) -> Result<SqResult> {
    let mut human = Vec::new();
    let mut model = Vec::new();
    for (w1, w2, score) in &dataset.pairs {
        let (Some((r1, _)), Some((r2, _))) = (space.resolve(w1), space.resolve(w2)) else {
            continue;
        };
        let cos = cosine_similarity(space.vector(r1), space.vector(r2)).map_err(|e| Error::metric("sq", e))?;
        human.push(*score);
        model.push(cos);
    }
    if human.len() < 2 {
        return Err(Error::metric(
            "sq",
            format!("dataset {} has {} in-vocabulary pairs, need 2", dataset.name, human.len()),
        ));
    }
    Ok(SqResult {
        correlation: spearman(&human, &model).map_err(|e| Error::metric("sq", e))?,
        pairs_used: human.len(),
        pairs_total: dataset.pairs.len(),
    })
}
