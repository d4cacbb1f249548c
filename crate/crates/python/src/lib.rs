//! Python bindings. Matrices cross the boundary as lists of rows and label
//! vectors as lists of ints, with -1 marking an unknown label.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gnnseed::cluster::kmeans as core_kmeans;
use gnnseed::experiment::{self, ExperimentConfig};
use gnnseed::gee;
use gnnseed::graph::MASKED;
use gnnseed::metrics;
use gnnseed::pipelines::{self, MethodResult};
use gnnseed::rng::{rng_from_seed, stage_rng, Stage};
use gnnseed::synth::{self, BlockModelConfig, DegreeCorrection};
use gnnseed::{LabelVector, Method, MethodConfig, SplitMasks, SplitRatio};

fn py_err(e: gnnseed::Error) -> PyErr {
    match e {
        gnnseed::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Labels with -1 for unknown; `k` defaults to one more than the largest label.
fn labels(values: Vec<i32>, k: Option<usize>) -> PyResult<LabelVector> {
    let k = k.unwrap_or_else(|| values.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize));
    LabelVector::new(values, k).map_err(py_err)
}

/// Undirected simple graph on nodes `0..n`.
#[pyclass(name = "Graph", module = "gnnseed", frozen)]
struct PyGraph {
    inner: gnnseed::Graph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from `(u, v)` pairs; duplicates and self-loops are dropped.
    #[new]
    fn new(edges: Vec<(usize, usize)>, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: gnnseed::Graph::from_edge_list(&edges, n).map_err(py_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of undirected edges.
    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn neighbors(&self, i: usize) -> PyResult<Vec<usize>> {
        if i >= self.inner.n() {
            return Err(PyValueError::new_err(format!("node {i} out of range")));
        }
        Ok(self.inner.neighbors(i).to_vec())
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.inner.has_edge(u, v)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    /// `D^-1/2 (A + I) D^-1/2` applied to a matrix given as rows.
    fn propagate(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = matrix(x)?;
        let out = self.inner.normalized_adjacency().apply(x.view()).map_err(py_err)?;
        Ok(rows(&out))
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Loads an edge list and label file; returns `(graph, labels)`.
#[pyfunction]
fn load_dataset(edges: &str, labels: &str) -> PyResult<(PyGraph, Vec<i32>)> {
    let d = experiment::load_dataset(edges, labels).map_err(py_err)?;
    Ok((PyGraph { inner: d.graph }, d.labels.into_values()))
}

/// Loads a bundled dataset such as `"karate"`; returns `(graph, labels)`.
#[pyfunction]
fn load_fixture(name: &str) -> PyResult<(PyGraph, Vec<i32>)> {
    let d = experiment::load_fixture(name).map_err(py_err)?;
    Ok((PyGraph { inner: d.graph }, d.labels.into_values()))
}

fn block_model(n: usize, block_probs: Vec<Vec<f64>>, sizes: Vec<f64>, dc: DegreeCorrection) -> PyResult<BlockModelConfig> {
    let cfg = BlockModelConfig {
        n,
        block_probs,
        community_proportions: sizes,
        degree_correction: dc,
    };
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// Samples an SBM; `sizes` are relative community sizes.
#[pyfunction]
#[pyo3(signature = (n, block_probs, sizes, seed=0))]
fn sample_sbm(n: usize, block_probs: Vec<Vec<f64>>, sizes: Vec<f64>, seed: u64) -> PyResult<(PyGraph, Vec<i32>)> {
    let cfg = block_model(n, block_probs, sizes, DegreeCorrection::None)?;
    let (g, y) = synth::sample_sbm(&cfg, &mut stage_rng(seed, Stage::Graph)).map_err(py_err)?;
    Ok((PyGraph { inner: g }, y.into_values()))
}

/// Samples a DC-SBM with `theta ~ Beta(a, b)`; returns `(graph, labels, theta)`.
#[pyfunction]
#[pyo3(signature = (n, block_probs, sizes, a=1.0, b=4.0, seed=0))]
fn sample_dcsbm(
    n: usize,
    block_probs: Vec<Vec<f64>>,
    sizes: Vec<f64>,
    a: f64,
    b: f64,
    seed: u64,
) -> PyResult<(PyGraph, Vec<i32>, Vec<f64>)> {
    let cfg = block_model(n, block_probs, sizes, DegreeCorrection::Beta { a, b })?;
    let s = synth::sample_dcsbm(&cfg, &mut stage_rng(seed, Stage::Graph)).map_err(py_err)?;
    Ok((PyGraph { inner: s.graph }, s.labels.into_values(), s.theta))
}

/// GEE embedding `A·W` from (partially masked) labels.
#[pyfunction]
#[pyo3(signature = (graph, labels, k=None))]
fn supervised_gee(graph: &PyGraph, labels: Vec<i32>, k: Option<usize>) -> PyResult<Vec<Vec<f64>>> {
    let y = self::labels(labels, k)?;
    let z = gee::supervised_gee(&graph.inner, &y).map_err(py_err)?;
    Ok(rows(z.data()))
}

/// Unsupervised GEE; returns `(embedding, labels, iterations)`. With
/// `row_normalize`, k-means sees unit-norm rows; the embedding stays raw.
#[pyfunction]
#[pyo3(signature = (graph, k, max_iter=30, seed=0, row_normalize=true))]
fn unsupervised_gee(
    graph: &PyGraph,
    k: usize,
    max_iter: usize,
    seed: u64,
    row_normalize: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<i32>, usize)> {
    let out = gee::unsupervised_gee_with(&graph.inner, k, max_iter, row_normalize, &mut stage_rng(seed, Stage::Gee))
        .map_err(py_err)?;
    Ok((rows(out.embedding.data()), out.labels.into_values(), out.iterations))
}

/// k-means with k-means++ seeding; returns `(labels, inertia)`.
#[pyfunction]
#[pyo3(signature = (points, k, restarts=10, max_iter=300, seed=0))]
fn kmeans(points: Vec<Vec<f64>>, k: usize, restarts: usize, max_iter: usize, seed: u64) -> PyResult<(Vec<i32>, f64)> {
    let x = matrix(points)?;
    let out = core_kmeans(x.view(), k, restarts, max_iter, &mut rng_from_seed(seed)).map_err(py_err)?;
    Ok((out.labels.into_values(), out.inertia))
}

#[pyfunction]
fn ari(a: Vec<i32>, b: Vec<i32>) -> PyResult<f64> {
    metrics::ari_raw(&a, &b).map_err(py_err)
}

/// Fraction of `mask` where `pred` equals `truth`.
#[pyfunction]
fn accuracy(pred: Vec<i32>, truth: Vec<i32>, mask: Vec<usize>) -> PyResult<f64> {
    let k = pred.iter().chain(&truth).copied().max().map_or(0, |m| (m + 1).max(0) as usize);
    metrics::accuracy(&labels(pred, Some(k))?, &labels(truth, Some(k))?, &mask).map_err(py_err)
}

/// Train/val/test node lists for a train+val pool of `ratio` percent.
#[pyfunction]
#[pyo3(signature = (labels, ratio, seed=0))]
fn split_nodes(labels: Vec<i32>, ratio: f64, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let y = self::labels(labels, None)?;
    let m = pipelines::split_nodes(&y, SplitRatio(ratio), &mut stage_rng(seed, Stage::Split)).map_err(py_err)?;
    Ok((m.train, m.val, m.test))
}

fn method_config(max_epochs: Option<usize>, patience: Option<usize>, lr: Option<f64>) -> MethodConfig {
    let mut cfg = MethodConfig::default();
    for t in [&mut cfg.clustering, &mut cfg.classification] {
        if let Some(v) = max_epochs {
            t.max_epochs = v;
        }
        if let Some(v) = patience {
            t.patience = v;
        }
        if let Some(v) = lr {
            t.learning_rate = v;
        }
    }
    cfg
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, r: MethodResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", r.method.name())?;
    d.set_item("predictions", r.predictions.into_values())?;
    d.set_item("metric", r.metric)?;
    d.set_item("epochs_run", r.epochs_run)?;
    d.set_item("wall_time", r.wall_time)?;
    d.set_item("seed", r.seed)?;
    d.set_item("embedding", rows(&r.embedding))?;
    Ok(d)
}

/// Clusters with `"gee"`, `"gnn"` or `"gg"`. `truth` enables the ARI metric.
#[pyfunction]
#[pyo3(signature = (method, graph, k, truth=None, seed=0, max_epochs=None, patience=None, lr=None))]
#[allow(clippy::too_many_arguments)]
fn cluster<'py>(
    py: Python<'py>,
    method: &str,
    graph: &PyGraph,
    k: usize,
    truth: Option<Vec<i32>>,
    seed: u64,
    max_epochs: Option<usize>,
    patience: Option<usize>,
    lr: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let method = parse_method(method)?;
    let truth = truth.map(|t| labels(t, None)).transpose()?;
    let cfg = method_config(max_epochs, patience, lr);
    let g = &graph.inner;
    let res = py
        .detach(|| pipelines::cluster(method, g, k, truth.as_ref(), &cfg, seed))
        .map_err(py_err)?;
    result_dict(py, res)
}

/// Classifies with `"gee"`, `"gnn"`, `"gg"` or `"gg-c"` on the given split.
/// Only train labels feed GEE/LDA; val labels drive early stopping.
#[pyfunction]
#[pyo3(signature = (method, graph, labels, train, val, test, seed=0, max_epochs=None, patience=None, lr=None))]
#[allow(clippy::too_many_arguments)]
fn classify<'py>(
    py: Python<'py>,
    method: &str,
    graph: &PyGraph,
    labels: Vec<i32>,
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
    seed: u64,
    max_epochs: Option<usize>,
    patience: Option<usize>,
    lr: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let method = parse_method(method)?;
    let y = self::labels(labels, None)?;
    let masks = SplitMasks { train, val, test };
    let cfg = method_config(max_epochs, patience, lr);
    let g = &graph.inner;
    let res = py
        .detach(|| pipelines::classify(method, g, &y, &masks, &cfg, seed))
        .map_err(py_err)?;
    result_dict(py, res)
}

/// Runs an experiment from TOML (or JSON) text; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (config, json=false))]
fn run_experiment(py: Python<'_>, config: &str, json: bool) -> PyResult<String> {
    let cfg = if json {
        ExperimentConfig::from_json_str(config)
    } else {
        ExperimentConfig::from_toml_str(config)
    }
    .map_err(py_err)?;
    let report = py.detach(|| experiment::run_experiment(&cfg)).map_err(py_err)?;
    let mut out = Vec::new();
    report.write_json(&mut out).map_err(py_err)?;
    String::from_utf8(out).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule(name = "gnnseed")]
fn gnnseed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add("MASKED", MASKED)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(load_fixture, m)?)?;
    m.add_function(wrap_pyfunction!(sample_sbm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_dcsbm, m)?)?;
    m.add_function(wrap_pyfunction!(supervised_gee, m)?)?;
    m.add_function(wrap_pyfunction!(unsupervised_gee, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(ari, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(split_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
