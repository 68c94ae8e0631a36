//! Python bindings: boosters, the simplex projection, the weighting rule,
//! dataset loading and whole experiments.
//!
//! Feature vectors are passed as `{index: value}` dicts or lists of
//! `(index, value)` pairs with 1-based indices; labels are `+1` or `-1`.

use std::collections::HashMap;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use osboost::combine::ExpMode;
use osboost::harness::{run_experiment as run_experiment_rs, BoosterKind, ExperimentConfig};
use osboost::{
    BoostError, BoosterParams, Dataset as RsDataset, Label, LabelMap, OnlineClassifier, SparseVector, WeakKind,
};

fn py_err(e: BoostError) -> PyErr {
    match e {
        BoostError::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_sparse(features: &Bound<'_, PyAny>) -> PyResult<SparseVector> {
    let pairs: Vec<(u32, f64)> = match features.extract::<HashMap<u32, f64>>() {
        Ok(map) => map.into_iter().collect(),
        Err(_) => features.extract()?,
    };
    SparseVector::from_pairs(pairs).map_err(py_err)
}

fn to_label(y: i32) -> PyResult<Label> {
    Label::from_sign(y).ok_or_else(|| PyValueError::new_err(format!("label must be +1 or -1, got {y}")))
}

fn parse<T: std::str::FromStr<Err = BoostError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// OSBoost with a uniform, `ocp` or `exp` combiner.
#[pyclass(name = "SmoothBooster")]
struct PySmoothBooster {
    inner: osboost::SmoothBooster,
}

#[pymethods]
impl PySmoothBooster {
    #[new]
    #[pyo3(signature = (n=100, gamma=0.1, weak="perceptron", combiner="uniform", seed=0))]
    fn new(n: usize, gamma: f64, weak: &str, combiner: &str, seed: u64) -> PyResult<Self> {
        let params = BoosterParams::new(n, gamma).map_err(py_err)?;
        let weak: WeakKind = parse(weak)?;
        let inner = match combiner {
            "uniform" => osboost::SmoothBooster::uniform(params, weak),
            "ocp" => osboost::SmoothBooster::ocp(params, weak),
            "exp" => osboost::SmoothBooster::exp(params, weak, seed, ExpMode::Randomized),
            other => return Err(PyValueError::new_err(format!("unknown combiner `{other}`"))),
        };
        Ok(Self { inner })
    }

    fn predict(&mut self, features: &Bound<'_, PyAny>) -> PyResult<i32> {
        let x = to_sparse(features)?;
        Ok(self.inner.predict(&x).map_err(py_err)?.as_i32())
    }

    fn update(&mut self, label: i32) -> PyResult<()> {
        self.inner.update(to_label(label)?).map_err(py_err)
    }

    /// Predicts, then learns the label; returns the prediction and the
    /// weight each learner was trained with.
    fn process(&mut self, features: &Bound<'_, PyAny>, label: i32) -> PyResult<(i32, Vec<f64>)> {
        let x = to_sparse(features)?;
        let log = self.inner.process_example(&x, to_label(label)?).map_err(py_err)?;
        Ok((log.prediction.as_i32(), log.weights))
    }

    #[getter]
    fn cum_weight(&self) -> Vec<f64> {
        self.inner.cum_weight().to_vec()
    }

    #[getter]
    fn examples_seen(&self) -> u64 {
        self.inner.examples_seen()
    }

    /// Smoothness certificate as a dict with `level`, `margin_violations`,
    /// `threshold` and `holds`.
    #[pyo3(signature = (delta=0.3))]
    fn lemma2<'py>(&self, py: Python<'py>, delta: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.lemma2(delta);
        let d = PyDict::new(py);
        d.set_item("level", r.level)?;
        d.set_item("margin_violations", r.margin_violations)?;
        d.set_item("threshold", r.threshold)?;
        d.set_item("holds", r.holds)?;
        Ok(d)
    }
}

#[pyclass(name = "OzaBoost")]
struct PyOzaBoost {
    inner: osboost::OzaBoost,
}

#[pymethods]
impl PyOzaBoost {
    #[new]
    #[pyo3(signature = (n=100, weak="perceptron", seed=0))]
    fn new(n: usize, weak: &str, seed: u64) -> PyResult<Self> {
        let inner = osboost::OzaBoost::new(n, parse(weak)?, seed).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn predict(&mut self, features: &Bound<'_, PyAny>) -> PyResult<i32> {
        let x = to_sparse(features)?;
        Ok(self.inner.predict(&x).map_err(py_err)?.as_i32())
    }

    fn update(&mut self, label: i32) -> PyResult<()> {
        self.inner.update(to_label(label)?).map_err(py_err)
    }
}

/// A normalized LIBSVM dataset.
#[pyclass(name = "Dataset")]
struct PyDataset {
    inner: RsDataset,
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dimension(&self) -> u32 {
        self.inner.dimension
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(features, label)` pairs with features as `(index, value)` lists.
    fn examples(&self) -> Vec<(Vec<(u32, f64)>, i32)> {
        self.inner
            .examples
            .iter()
            .map(|e| (e.features.entries().to_vec(), e.label.as_i32()))
            .collect()
    }
}

#[pyfunction]
#[pyo3(signature = (path, label_map=""))]
fn load_libsvm(path: &str, label_map: &str) -> PyResult<PyDataset> {
    let labels: LabelMap = parse(label_map)?;
    Ok(PyDataset {
        inner: RsDataset::load(path, &labels).map_err(py_err)?,
    })
}

/// Euclidean projection onto the probability simplex.
#[pyfunction]
fn project_simplex(v: Vec<f64>) -> Vec<f64> {
    osboost::project_simplex(&v).as_slice().to_vec()
}

#[pyfunction]
fn smooth_weight(z: f64, gamma: f64) -> f64 {
    osboost::smooth_weight(z, gamma).value()
}

/// Runs seeded trials and returns `mean_error`, `std_error`, `errors` (one
/// per trial) and `t`.
#[pyfunction]
#[pyo3(signature = (dataset, booster="osboost", weak="perceptron", n=100, gamma=0.1, trials=5, seed=0, diagnostics=false, delta=0.3))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    booster: &str,
    weak: &str,
    n: usize,
    gamma: f64,
    trials: usize,
    seed: u64,
    diagnostics: bool,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig {
        booster: parse::<BoosterKind>(booster)?,
        weak: parse(weak)?,
        n,
        gamma,
        trials,
        base_seed: seed,
        diagnostics,
        delta,
        exp_mode: ExpMode::Randomized,
    };
    let s = py.detach(|| run_experiment_rs(&cfg, &dataset.inner)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("mean_error", s.mean_error)?;
    d.set_item("std_error", s.std_error)?;
    d.set_item("errors", s.trials.iter().map(|t| t.error_rate).collect::<Vec<_>>())?;
    d.set_item("t", s.t)?;
    Ok(d)
}

#[pymodule]
fn pyosboost(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySmoothBooster>()?;
    m.add_class::<PyOzaBoost>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(load_libsvm, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_weight, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
