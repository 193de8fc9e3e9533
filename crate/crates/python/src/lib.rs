//! Python bindings: spaces, specifications, the bias measures and debiasing.
//!
//! Reports and metadata cross the boundary as plain dicts (parsed from the
//! same stable JSON the CLI prints), so Python sees exactly the CLI output.

use std::sync::Arc;

use embias::json::to_stable_json;
use embias::metrics::{self, EvaluateOptions, SimilarityDataset, DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use embias::store;
use embias::{BiasSpecification, DebiasMethod, Matrix, Metric};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: embias::Error) -> PyErr {
    match e {
        embias::Error::Io(err) => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = to_stable_json(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// An immutable word embedding space.
#[pyclass(name = "EmbeddingSpace", module = "embias", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySpace {
    inner: Arc<embias::EmbeddingSpace>,
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (words, vectors, name = "space"))]
    fn new(words: Vec<String>, vectors: Vec<Vec<f64>>, name: &str) -> PyResult<Self> {
        if words.len() != vectors.len() {
            return Err(PyValueError::new_err(format!(
                "{} words but {} vectors",
                words.len(),
                vectors.len()
            )));
        }
        let matrix = Matrix::from_rows(&vectors).map_err(to_py_err)?;
        let space = embias::EmbeddingSpace::new(name, words, matrix).map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(space) })
    }

    /// Reads a text-format file (optional "count dim" header line).
    #[staticmethod]
    #[pyo3(signature = (path, limit = None))]
    fn load_text(py: Python<'_>, path: String, limit: Option<usize>) -> PyResult<Self> {
        let space = py.detach(|| store::load_text(&path, limit)).map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(space) })
    }

    #[staticmethod]
    fn load_binary(py: Python<'_>, vocab_path: String, vectors_path: String) -> PyResult<Self> {
        let space = py
            .detach(|| store::load_binary(&vocab_path, &vectors_path))
            .map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(space) })
    }

    fn save_text(&self, path: String) -> PyResult<()> {
        store::save_text(&self.inner, path).map_err(to_py_err)
    }

    fn save_binary(&self, vocab_path: String, vectors_path: String) -> PyResult<()> {
        store::save_binary(&self.inner, vocab_path, vectors_path).map_err(to_py_err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.resolve(word).is_some()
    }

    fn __getitem__(&self, word: &str) -> PyResult<Vec<f64>> {
        self.inner
            .resolve(word)
            .map(|(row, _)| self.inner.vector(row).to_vec())
            .ok_or_else(|| PyKeyError::new_err(word.to_string()))
    }

    /// Lookup result dict: word, found, matched_form and vector when found.
    fn lookup<'py>(&self, py: Python<'py>, word: &str) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.lookup(word))
    }

    fn __repr__(&self) -> String {
        format!(
            "EmbeddingSpace(name={:?}, words={}, dim={})",
            self.inner.name(),
            self.inner.len(),
            self.inner.dim()
        )
    }
}

/// Target sets t1/t2 and, for explicit specifications, attribute sets a1/a2.
#[pyclass(name = "BiasSpecification", module = "embias", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySpec {
    inner: BiasSpecification,
}

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (t1, t2, a1 = None, a2 = None, name = "custom"))]
    fn new(t1: Vec<String>, t2: Vec<String>, a1: Option<Vec<String>>, a2: Option<Vec<String>>, name: &str) -> PyResult<Self> {
        let attributes = match (a1, a2) {
            (Some(a1), Some(a2)) => Some((a1, a2)),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("give both a1 and a2, or neither")),
        };
        let inner = BiasSpecification::new(name, t1, t2, attributes).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        embias::builtin_spec(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        embias::parse_spec(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn t1(&self) -> Vec<String> {
        self.inner.t1().to_vec()
    }

    #[getter]
    fn t2(&self) -> Vec<String> {
        self.inner.t2().to_vec()
    }

    #[getter]
    fn a1(&self) -> Option<Vec<String>> {
        self.inner.a1().map(<[String]>::to_vec)
    }

    #[getter]
    fn a2(&self) -> Option<Vec<String>> {
        self.inner.a2().map(<[String]>::to_vec)
    }

    #[getter]
    fn is_explicit(&self) -> bool {
        self.inner.is_explicit()
    }

    fn __repr__(&self) -> String {
        format!("BiasSpecification(name={:?}, explicit={})", self.inner.name(), self.inner.is_explicit())
    }
}

/// Names of the bundled specifications.
#[pyfunction]
fn builtin_specs() -> Vec<String> {
    embias::builtin_specs().iter().map(|s| s.name().to_string()).collect()
}

#[pyfunction]
#[pyo3(signature = (space, spec, n_permutations = DEFAULT_PERMUTATIONS, seed = DEFAULT_SEED))]
fn weat<'py>(py: Python<'py>, space: &PySpace, spec: &PySpec, n_permutations: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let (s, sp) = (space.inner.clone(), spec.inner.clone());
    let result = py
        .detach(move || metrics::weat(&s, &sp, n_permutations, seed))
        .map_err(to_py_err)?;
    to_dict(py, &result)
}

#[pyfunction]
fn ect(space: &PySpace, spec: &PySpec) -> PyResult<f64> {
    metrics::ect(&space.inner, &spec.inner).map_err(to_py_err)
}

#[pyfunction]
fn bat(space: &PySpace, spec: &PySpec) -> PyResult<f64> {
    metrics::bat(&space.inner, &spec.inner).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (space, spec, restarts = 10, seed = DEFAULT_SEED))]
fn ibt_cluster(space: &PySpace, spec: &PySpec, restarts: usize, seed: u64) -> PyResult<f64> {
    metrics::ibt_cluster(&space.inner, &spec.inner, restarts, seed).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (space, spec, gamma = None, c = 1.0))]
fn ibt_svm(space: &PySpace, spec: &PySpec, gamma: Option<f64>, c: f64) -> PyResult<f64> {
    metrics::ibt_svm(&space.inner, &spec.inner, gamma, c).map_err(to_py_err)
}

/// Spearman correlation between dataset scores and cosine similarities.
/// `pairs` holds `(word1, word2, score)` tuples.
#[pyfunction]
#[pyo3(signature = (space, pairs, name = "dataset"))]
fn semantic_quality<'py>(
    py: Python<'py>,
    space: &PySpace,
    pairs: Vec<(String, String, f64)>,
    name: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let result = metrics::semantic_quality(&space.inner, &SimilarityDataset::new(name, pairs)).map_err(to_py_err)?;
    to_dict(py, &result)
}

/// Full report as a dict. `metrics` defaults to everything the spec supports;
/// `sq_datasets` are paths to word-similarity TSV files.
#[pyfunction]
#[pyo3(signature = (space, spec, metrics = None, seed = DEFAULT_SEED, n_permutations = DEFAULT_PERMUTATIONS, sq_datasets = Vec::new()))]
fn evaluate<'py>(
    py: Python<'py>,
    space: &PySpace,
    spec: &PySpec,
    metrics: Option<Vec<String>>,
    seed: u64,
    n_permutations: usize,
    sq_datasets: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let selected = match metrics {
        Some(list) => Metric::parse_list(&list.join(",")).map_err(to_py_err)?,
        None => Metric::defaults_for(&spec.inner),
    };
    let datasets = sq_datasets
        .iter()
        .map(SimilarityDataset::load)
        .collect::<embias::Result<Vec<_>>>()
        .map_err(to_py_err)?;
    let options = EvaluateOptions {
        seed,
        n_permutations,
        sq_datasets: datasets,
        ..Default::default()
    };
    let (s, sp) = (space.inner.clone(), spec.inner.clone());
    let report = py
        .detach(move || embias::evaluate(&s, &sp, &selected, &options))
        .map_err(to_py_err)?;
    to_dict(py, &report)
}

/// Returns `(debiased_space, metadata)`. `method` is gbdd, bam, gbdd-bam or bam-gbdd.
#[pyfunction]
fn debias<'py>(py: Python<'py>, space: &PySpace, spec: &PySpec, method: &str) -> PyResult<(PySpace, Bound<'py, PyAny>)> {
    let sequence = DebiasMethod::parse_sequence(method).map_err(to_py_err)?;
    let (s, sp) = (space.inner.clone(), spec.inner.clone());
    let result = py
        .detach(move || embias::compose(&s, &sp, &sequence))
        .map_err(to_py_err)?;
    let meta = to_dict(py, &result.metadata())?;
    Ok((PySpace { inner: Arc::new(result.space) }, meta))
}

/// 2D PCA coordinates of the spec terms, one projection per space.
#[pyfunction]
fn project<'py>(py: Python<'py>, spaces: Vec<PySpace>, spec: &PySpec) -> PyResult<Bound<'py, PyAny>> {
    let refs: Vec<&embias::EmbeddingSpace> = spaces.iter().map(|s| s.inner.as_ref()).collect();
    let view = embias::project_spec(&refs, &spec.inner).map_err(to_py_err)?;
    to_dict(py, &view)
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(builtin_specs, m)?)?;
    m.add_function(wrap_pyfunction!(weat, m)?)?;
    m.add_function(wrap_pyfunction!(ect, m)?)?;
    m.add_function(wrap_pyfunction!(bat, m)?)?;
    m.add_function(wrap_pyfunction!(ibt_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(ibt_svm, m)?)?;
    m.add_function(wrap_pyfunction!(semantic_quality, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(debias, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
#[pyo3(name = "embias")]
fn embias_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
