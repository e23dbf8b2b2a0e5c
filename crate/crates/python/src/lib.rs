//! Python bindings.
//!
//! Datasets and models are opaque handles; everything else crosses the
//! boundary as plain lists or as JSON-shaped dicts (through the `json`
//! module), with configs accepted as JSON strings in the core's format.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use repairlab::audit::{audit_sweep, Probe};
use repairlab::classifiers::{train as train_model, Model, TrainerConfig};
use repairlab::data::{generate_synthetic, load_csv, write_csv, Schema};
use repairlab::massage::{compute_m, massage as massage_data};
use repairlab::optimize::{apply_repair, check_repair_map, solve_repair_map, OptimizeConfig};
use repairlab::pipeline::{compare_interventions, run_pipeline, PipelineConfig};
use repairlab::postprocess::{ensemble_disagreement, reject_option, RejectOptionConfig};
use repairlab::routing::{simulate as simulate_routing, verify_blindness, RoutingConfig};
use repairlab::smote::{equalizing_count, smote_augment, Cell};
use repairlab::{metrics, Dataset as CoreDataset, GeneratorConfig};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_json<T: DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(err)
}

/// Tabular data with one binary label and one binary protected column.
#[pyclass(name = "Dataset", module = "repairlab_py", frozen)]
struct PyDataset {
    inner: CoreDataset,
}

#[pymethods]
impl PyDataset {
    /// Biased synthetic data; defaults are the standard benchmark set.
    #[staticmethod]
    #[pyo3(signature = (n_rows=1000, base_positive_rate=0.6, bias_strength=0.3, proxy_correlation=0.8, noise_features=2, seed=7, numeric_features=0))]
    fn generate(
        n_rows: usize,
        base_positive_rate: f64,
        bias_strength: f64,
        proxy_correlation: f64,
        noise_features: usize,
        seed: u64,
        numeric_features: usize,
    ) -> PyResult<Self> {
        let cfg = GeneratorConfig {
            n_rows,
            base_positive_rate,
            bias_strength,
            proxy_correlation,
            noise_features,
            numeric_features,
            seed,
            ..GeneratorConfig::standard()
        };
        Ok(Self { inner: generate_synthetic(&cfg).map_err(err)? })
    }

    #[staticmethod]
    fn from_csv(path: &str, schema_path: &str) -> PyResult<Self> {
        let schema = Schema::load(schema_path.as_ref()).map_err(err)?;
        Ok(Self { inner: load_csv(path.as_ref(), &schema).map_err(err)? })
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        write_csv(path.as_ref(), &self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn columns(&self) -> Vec<String> {
        self.inner.schema().columns().iter().map(|c| c.name.clone()).collect()
    }

    fn labels(&self) -> Vec<bool> {
        self.inner.labels()
    }

    fn groups(&self) -> Vec<bool> {
        self.inner.groups()
    }

    fn row_ids(&self) -> Vec<u64> {
        self.inner.row_ids().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(rows={}, columns={:?})", self.inner.len(), self.columns())
    }
}

/// A trained scorer.
#[pyclass(name = "Model", module = "repairlab_py", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// Favorable-outcome scores in `[0, 1]`.
    fn predict(&self, data: &PyDataset) -> PyResult<Vec<f64>> {
        Ok(self.inner.predict(&data.inner).map_err(err)?.scores)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: from_json(text)? })
    }
}

/// Trains a model; `config` is a JSON trainer config (default logistic).
#[pyfunction]
#[pyo3(signature = (data, config=None))]
fn train(data: &PyDataset, config: Option<&str>) -> PyResult<PyModel> {
    let cfg: TrainerConfig = config.map(from_json).transpose()?.unwrap_or_default();
    Ok(PyModel { inner: train_model(&cfg, &data.inner).map_err(err)? })
}

#[pyfunction]
fn disparate_impact<'py>(py: Python<'py>, outcomes: Vec<bool>, groups: Vec<bool>) -> PyResult<Bound<'py, PyAny>> {
    let p = metrics::disparate_impact(&outcomes, &groups).map_err(err)?;
    to_py(py, &metrics::FairnessReport::from_parity(&p))
}

#[pyfunction]
fn accuracy(predictions: Vec<bool>, truth: Vec<bool>) -> PyResult<f64> {
    metrics::accuracy(&predictions, &truth).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (predictions, features, k=5))]
fn consistency(predictions: Vec<f64>, features: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    metrics::consistency(&predictions, &features, k).map_err(err)
}

/// Returns `(repaired, plan)`.
#[pyfunction]
fn massage<'py>(py: Python<'py>, data: &PyDataset) -> PyResult<(PyDataset, Bound<'py, PyAny>)> {
    let out = massage_data(&data.inner).map_err(err)?;
    Ok((PyDataset { inner: out.data }, to_py(py, &out.plan)?))
}

#[pyfunction]
fn flip_count(data: &PyDataset) -> PyResult<usize> {
    Ok(compute_m(&data.inner).map_err(err)?.m)
}

/// Solves for a repair map on `features` and samples a repaired dataset.
/// Returns `(repaired, {"objective", "converged", "check_passed", "map"})`.
#[pyfunction]
#[pyo3(signature = (data, features, config, seed=0))]
fn optimize<'py>(
    py: Python<'py>,
    data: &PyDataset,
    features: Vec<String>,
    config: &str,
    seed: u64,
) -> PyResult<(PyDataset, Bound<'py, PyAny>)> {
    let cfg: OptimizeConfig = from_json(config)?;
    let joint = repairlab::data::empirical_joint(&data.inner, &features).map_err(err)?;
    let outcome = solve_repair_map(&joint, &cfg).map_err(err)?;
    let check = check_repair_map(&joint, &cfg, &outcome.map, cfg.tolerance).map_err(err)?;
    let repaired = apply_repair(&data.inner, &outcome.map, seed).map_err(err)?;
    let summary = serde_json::json!({
        "objective": outcome.objective,
        "converged": outcome.converged,
        "max_violation": outcome.max_violation,
        "check_passed": check.passed(),
        "map": outcome.map,
    });
    Ok((PyDataset { inner: repaired }, to_py(py, &summary)?))
}

/// Adds synthetic rows to one (group, label) cell; `count` defaults to
/// the number that matches the largest cell.
#[pyfunction]
#[pyo3(signature = (data, privileged, favorable, k=5, count=None, seed=0))]
fn smote(data: &PyDataset, privileged: bool, favorable: bool, k: usize, count: Option<usize>, seed: u64) -> PyResult<PyDataset> {
    let cell = Cell { privileged, favorable };
    let count = count.unwrap_or_else(|| equalizing_count(&data.inner, cell));
    Ok(PyDataset { inner: smote_augment(&data.inner, k, cell, count, seed).map_err(err)?.data })
}

/// Returns `(decisions, intervened)`.
#[pyfunction(name = "reject_option")]
fn py_reject_option(scores: Vec<f64>, groups: Vec<bool>, theta: f64) -> PyResult<(Vec<bool>, Vec<bool>)> {
    let d = reject_option(&scores, &groups, &RejectOptionConfig { theta }).map_err(err)?;
    Ok((d.decisions, d.intervened))
}

/// Returns `(decisions, intervened)`.
#[pyfunction(name = "ensemble_disagreement")]
fn py_ensemble(decision_sets: Vec<Vec<bool>>, groups: Vec<bool>) -> PyResult<(Vec<bool>, Vec<bool>)> {
    let d = ensemble_disagreement(&decision_sets, &groups).map_err(err)?;
    Ok((d.decisions, d.intervened))
}

/// Audits every original row as a probe. Returns `(findings, summary)`.
#[pyfunction(name = "audit")]
#[pyo3(signature = (original, repaired, k=5, trainer=None))]
fn py_audit<'py>(
    py: Python<'py>,
    original: &PyDataset,
    repaired: &PyDataset,
    k: usize,
    trainer: Option<&str>,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let cfg: TrainerConfig = trainer.map(from_json).transpose()?.unwrap_or_default();
    let probes = Probe::all_rows(&original.inner);
    let (findings, summary) = audit_sweep(&original.inner, &repaired.inner, &probes, k, &cfg).map_err(err)?;
    Ok((to_py(py, &findings)?, to_py(py, &summary)?))
}

/// Routing simulation; returns the summary plus the blindness check.
#[pyfunction]
#[pyo3(signature = (matters, model, consent_rate, ai_fraction_cap, seed=0))]
fn simulate<'py>(
    py: Python<'py>,
    matters: &PyDataset,
    model: &PyModel,
    consent_rate: f64,
    ai_fraction_cap: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RoutingConfig::new(consent_rate, ai_fraction_cap, seed);
    let result = simulate_routing(&matters.inner, &model.inner, &cfg).map_err(err)?;
    let out = serde_json::json!({ "summary": result.summary, "blindness": verify_blindness(&result) });
    to_py(py, &out)
}

/// Runs a TOML pipeline config; returns the report.
#[pyfunction(name = "run_pipeline")]
fn py_run_pipeline<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = PipelineConfig::from_toml(config, "<python>").map_err(err)?;
    cfg.validate("<python>").map_err(err)?;
    to_py(py, &run_pipeline(&cfg).map_err(err)?.report)
}

/// Runs the `[[sweep]]` stacks of a TOML config; returns the comparison rows.
#[pyfunction]
fn compare<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = PipelineConfig::from_toml(config, "<python>").map_err(err)?;
    cfg.validate("<python>").map_err(err)?;
    to_py(py, &compare_interventions(&cfg).map_err(err)?.rows)
}

#[pymodule]
fn repairlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(disparate_impact, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(consistency, m)?)?;
    m.add_function(wrap_pyfunction!(massage, m)?)?;
    m.add_function(wrap_pyfunction!(flip_count, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(smote, m)?)?;
    m.add_function(wrap_pyfunction!(py_reject_option, m)?)?;
    m.add_function(wrap_pyfunction!(py_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(py_audit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
