//! Measuring and mitigating stereotypical bias in static word embeddings.
//!
//! The crate is organised around an immutable [`EmbeddingSpace`] and a
//! [`BiasSpecification`] naming two target term sets (and, for explicit
//! specifications, two attribute sets):
//!
//! * [`metrics`] scores a space: WEAT with a permutation test, ECT, BAT,
//!   clustering and SVM separability of the targets, and semantic quality
//!   against word-similarity ratings;
//! * [`debias`] produces new spaces by removing a bias direction (GBDD),
//!   by averaging with an orthogonal self-alignment (BAM), or both;
//! * [`store`] reads and writes text and binary embedding files.
//!
//! ```
//! use embias::{metrics, BiasSpecification, EmbeddingSpace};
//!
//! let space = EmbeddingSpace::from_pairs(
//!     "toy",
//!     &[("t1", [1.0, 0.0]), ("t2", [0.0, 1.0]), ("a1", [1.0, 0.0]), ("a2", [0.0, 1.0])],
//! )
//! .unwrap();
//! let spec = BiasSpecification::explicit("toy", &["t1"], &["t2"], &["a1"], &["a2"]).unwrap();
//! let result = metrics::weat(&space, &spec, 1000, 42).unwrap();
//! assert_eq!(result.statistic, 2.0);
//! ```

pub mod catalog;
pub mod debias;
pub mod error;
pub mod json;
pub mod metrics;
pub mod numerics;
pub mod projection;
pub mod spec;
pub mod store;

pub use catalog::DataDir;
pub use debias::{bam, compose, gbdd, DebiasMethod, DebiasResult};
pub use error::{Error, Result};
pub use metrics::{evaluate, EvaluateOptions, EvaluationReport, Metric};
pub use numerics::Matrix;
pub use projection::{project_spec, ProjectionView};
pub use spec::{builtin_spec, builtin_specs, filter_to_vocab, parse_spec, BiasSpecification, FilteredSpec, TermSet};
pub use store::{EmbeddingSpace, LookupResult};
