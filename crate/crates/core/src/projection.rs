//! 2D PCA views of specification terms, for before/after plots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{pca_2d, Matrix};
use crate::spec::{BiasSpecification, TermSet};
use crate::store::EmbeddingSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedPoint {
    pub term: String,
    pub set: TermSet,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceProjection {
    pub space: String,
    pub points: Vec<ProjectedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionView {
    pub spec: String,
    pub projections: Vec<SpaceProjection>,
    /// Terms left out because at least one space lacks them.
    pub missing: Vec<String>,
}

/// Projects the spec terms found in every given space, each space with its own PCA.
///
/// Terms keep specification order (t1, t2, a1, a2), so point `i` refers to
/// the same term in every projection.
pub fn project_spec(spaces: &[&EmbeddingSpace], spec: &BiasSpecification) -> Result<ProjectionView> {
    if spaces.is_empty() {
        return Err(Error::Shape("no spaces to project".into()));
    }
    let mut terms: Vec<(TermSet, &str)> = Vec::new();
    let mut missing = Vec::new();
    for (set, list) in spec.sets() {
        for term in list {
            if spaces.iter().all(|s| s.resolve(term).is_some()) {
                terms.push((set, term));
            } else {
                missing.push(term.clone());
            }
        }
    }
    if terms.is_empty() {
        return Err(Error::EmptyAfterFilter {
            set: "all".into(),
        });
    }

    let mut projections = Vec::with_capacity(spaces.len());
    for space in spaces {
        let rows: Vec<&[f64]> = terms
            .iter()
            .map(|(_, t)| space.vector(space.resolve(t).expect("checked above").0))
            .collect();
        let coords = pca_2d(&Matrix::from_rows(&rows)?)?;
        let points = terms
            .iter()
            .zip(coords.row_iter())
            .map(|((set, term), xy)| ProjectedPoint {
                term: term.to_string(),
                set: *set,
                x: xy[0],
                y: xy[1],
            })
            .collect();
        projections.push(SpaceProjection {
            space: space.name().to_string(),
            points,
        });
    }
    Ok(ProjectionView {
        spec: spec.name().to_string(),
        projections,
        missing,
    })
}
