//! Python bindings: search points, the distorted landscape, the λ
//! controller, single runs, replicated experiments and the analysis formulas.

use disom_core as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "SearchPoint", module = "disom", from_py_object)]
#[derive(Clone)]
struct PySearchPoint(core::SearchPoint);

#[pymethods]
impl PySearchPoint {
    /// Builds a point from a string of `0`/`1` characters.
    #[new]
    fn new(bits: &str) -> PyResult<Self> {
        bits.parse().map(Self).map_err(err)
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        let mut rng = core::RandomStream::new(seed);
        core::uniform_random_point(n, &mut rng).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn onemax(&self) -> usize {
        core::onemax(&self.0)
    }

    fn zeromax(&self) -> usize {
        core::zeromax(&self.0)
    }

    fn flip(&mut self, i: usize) -> PyResult<()> {
        if i >= self.0.n() {
            return Err(PyValueError::new_err(format!("index {i} out of range")));
        }
        self.0.flip(i);
        Ok(())
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SearchPoint('{}')", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

fn point(x: &Bound<'_, PyAny>) -> PyResult<core::SearchPoint> {
    if let Ok(p) = x.extract::<PySearchPoint>() {
        return Ok(p.0);
    }
    let s: String = x.extract()?;
    s.parse().map_err(err)
}

#[pyfunction]
fn onemax(x: &Bound<'_, PyAny>) -> PyResult<usize> {
    Ok(core::onemax(&point(x)?))
}

#[pyfunction]
fn hamming(x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<usize> {
    core::hamming(&point(x)?, &point(y)?).map_err(err)
}

#[pyfunction]
fn nearest_int(x: f64) -> u64 {
    core::nearest_int(x)
}

#[pyclass(name = "DistortedOneMax", module = "disom")]
struct PyDistortedOneMax {
    inner: core::DistortedOneMax,
    counter: core::EvalCounter,
}

#[pymethods]
impl PyDistortedOneMax {
    #[new]
    #[pyo3(signature = (n, p, d, noise_key = 0))]
    fn new(n: usize, p: f64, d: f64, noise_key: u64) -> PyResult<Self> {
        Ok(Self {
            inner: core::DistortedOneMax::new(n, p, d, noise_key).map_err(err)?,
            counter: core::EvalCounter::new(),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d()
    }

    #[getter]
    fn evaluations(&self) -> u64 {
        self.counter.count()
    }

    fn is_distorted(&self, x: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.inner.is_distorted(&point(x)?).map_err(err)
    }

    fn evaluate(&mut self, x: &Bound<'_, PyAny>) -> PyResult<f64> {
        let x = point(x)?;
        self.inner.evaluate(&x, &mut self.counter).map(|f| f.value()).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (lambda_, success, factor = 1.5, s = 1.0, lambda_max = 100.0))]
fn update_lambda(lambda_: f64, success: bool, factor: f64, s: f64, lambda_max: f64) -> PyResult<f64> {
    let params = core::ControllerParams::new(factor, s, lambda_max).map_err(err)?;
    core::update_lambda(lambda_, success, &params).map_err(err)
}

fn algorithm(
    name: &str,
    n: usize,
    lambda: Option<u64>,
    factor: f64,
    s: f64,
    lambda_max: Option<f64>,
) -> PyResult<core::AlgorithmKind> {
    let need_lambda = || lambda.ok_or_else(|| PyValueError::new_err(format!("algorithm {name:?} needs lambda_")));
    let kind = match name {
        "sa" | "sa_comma_reset" => {
            let nf = n as f64;
            let cap = lambda_max.unwrap_or((nf * nf.ln()).max(1.0));
            core::AlgorithmKind::SaCommaReset(core::ControllerParams::new(factor, s, cap).map_err(err)?)
        }
        "comma" | "static_comma" => core::AlgorithmKind::StaticComma { lambda: need_lambda()? },
        "plus" | "static_plus" => core::AlgorithmKind::StaticPlus { lambda: need_lambda()? },
        "oneplusone" | "one_plus_one" => core::AlgorithmKind::OnePlusOne,
        other => return Err(PyValueError::new_err(format!("unknown algorithm {other:?}"))),
    };
    kind.validate().map_err(err)?;
    Ok(kind)
}

/// Runs one trial; `noise_key` defaults to the key the harness derives from `seed`.
#[pyfunction]
#[pyo3(signature = (
    algorithm_, n, p, d, k_star, budget, seed,
    lambda_ = None, factor = 1.5, s = 1.0, lambda_max = None, noise_key = None, record_trajectory = false
))]
#[allow(clippy::too_many_arguments)]
fn run_to_target<'py>(
    py: Python<'py>,
    algorithm_: &str,
    n: usize,
    p: f64,
    d: f64,
    k_star: f64,
    budget: u64,
    seed: u64,
    lambda_: Option<u64>,
    factor: f64,
    s: f64,
    lambda_max: Option<f64>,
    noise_key: Option<u64>,
    record_trajectory: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = algorithm(algorithm_, n, lambda_, factor, s, lambda_max)?;
    let key = noise_key.unwrap_or_else(|| core::harness::noise_key_for_seed(seed));
    let landscape = core::DistortedOneMax::new(n, p, d, key).map_err(err)?;
    let spec = core::TargetSpec::new(k_star, n).map_err(err)?;
    let options = core::RunOptions {
        record_trajectory,
        track_distinct_queries: false,
    };
    let r = core::run_to_target_with(kind, &landscape, spec, budget, seed, options).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("algorithm", kind.name())?;
    out.set_item("evaluations", r.evaluations)?;
    out.set_item("generations", r.generations)?;
    out.set_item("hit_target", r.hit_target)?;
    out.set_item("censored", r.censored)?;
    out.set_item("final_fitness", r.final_fitness.value())?;
    out.set_item("final_lambda", r.final_lambda)?;
    if let Some(t) = r.trajectory {
        let rows: Vec<(u64, f64, f64, bool)> = t.iter().map(|g| (g.t, g.lambda, g.fitness, g.distorted)).collect();
        out.set_item("trajectory", rows)?;
    }
    Ok(out)
}

/// Replicated experiment; returns one dict per replication.
#[pyfunction]
#[pyo3(signature = (
    algorithm_, n, p, d, k_star, budget, replications, base_seed = 1,
    lambda_ = None, factor = 1.5, s = 1.0, lambda_max = None, parallelism = 1
))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    algorithm_: &str,
    n: usize,
    p: f64,
    d: f64,
    k_star: f64,
    budget: u64,
    replications: u64,
    base_seed: u64,
    lambda_: Option<u64>,
    factor: f64,
    s: f64,
    lambda_max: Option<f64>,
    parallelism: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kind = algorithm(algorithm_, n, lambda_, factor, s, lambda_max)?;
    let config = core::ExperimentConfig {
        experiment_id: format!("{}_n{n}", kind.name()),
        algorithm: kind,
        n,
        p,
        d,
        k_star,
        budget,
        replications,
        base_seed,
        parallelism,
    };
    config.validate().map_err(err)?;
    let records = py.detach(|| core::run_experiment(&config)).map_err(err)?;
    records
        .iter()
        .map(|r| {
            let out = PyDict::new(py);
            out.set_item("replication", r.replication)?;
            out.set_item("seed", r.seed)?;
            out.set_item("evaluations", r.evaluations)?;
            out.set_item("hit_target", r.hit_target)?;
            out.set_item("censored", r.censored)?;
            out.set_item("final_fitness", r.final_fitness)?;
            Ok(out)
        })
        .collect()
}

/// Summary statistics of evaluation counts; `censored` defaults to all false.
#[pyfunction]
#[pyo3(signature = (evaluations, n, p, censored = None))]
fn summarize<'py>(
    py: Python<'py>,
    evaluations: Vec<u64>,
    n: usize,
    p: f64,
    censored: Option<Vec<bool>>,
) -> PyResult<Bound<'py, PyDict>> {
    let censored = censored.unwrap_or_else(|| vec![false; evaluations.len()]);
    if censored.len() != evaluations.len() {
        return Err(PyValueError::new_err("evaluations and censored differ in length"));
    }
    let records: Vec<core::RunRecord> = evaluations
        .iter()
        .zip(&censored)
        .enumerate()
        .map(|(i, (&e, &c))| core::RunRecord {
            replication: i as u64,
            seed: i as u64,
            evaluations: e,
            hit_target: !c,
            censored: c,
            final_fitness: 0.0,
        })
        .collect();
    let s = core::summarize(&records, n, p).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("count", s.count)?;
    out.set_item("censored_count", s.censored_count)?;
    out.set_item("mean", s.mean)?;
    out.set_item("median", s.median)?;
    out.set_item("stddev", s.stddev)?;
    out.set_item("normalized_mean", s.normalized_mean)?;
    out.set_item("normalized_median", s.normalized_median)?;
    out.set_item("median_unreliable", s.median_unreliable)?;
    Ok(out)
}

#[pyfunction]
fn figure2_params(n: usize) -> PyResult<(u64, f64)> {
    core::figure2_params(n).map_err(err)
}

#[pyfunction]
fn normalized_runtime(evaluations: f64, n: usize, p: f64) -> PyResult<f64> {
    core::normalized_runtime(evaluations, n, p).map_err(err)
}

#[pyfunction]
fn clone_absence_lower_bound(lambda_: u64) -> PyResult<f64> {
    core::analysis::clone_absence_lower_bound(lambda_).map_err(err)
}

#[pyfunction]
fn clone_presence_lower_bound(lambda_: u64, n: usize) -> PyResult<f64> {
    core::analysis::clone_presence_lower_bound(lambda_, n).map_err(err)
}

#[pyfunction]
fn prob_hamming_three(n: usize) -> PyResult<f64> {
    core::analysis::prob_hamming_three(n).map_err(err)
}

#[pyfunction]
fn gamblers_ruin_exact(q: f64, beta: u32, i: u32) -> PyResult<f64> {
    core::analysis::gamblers_ruin_exact(q, beta, i).map_err(err)
}

#[pyfunction]
fn gamblers_ruin_bound(q: f64, beta: u32) -> PyResult<f64> {
    core::analysis::gamblers_ruin_bound(q, beta).map_err(err)
}

#[pymodule]
fn disom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySearchPoint>()?;
    m.add_class::<PyDistortedOneMax>()?;
    m.add_function(wrap_pyfunction!(onemax, m)?)?;
    m.add_function(wrap_pyfunction!(hamming, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_int, m)?)?;
    m.add_function(wrap_pyfunction!(update_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(run_to_target, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(figure2_params, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_runtime, m)?)?;
    m.add_function(wrap_pyfunction!(clone_absence_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(clone_presence_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(prob_hamming_three, m)?)?;
    m.add_function(wrap_pyfunction!(gamblers_ruin_exact, m)?)?;
    m.add_function(wrap_pyfunction!(gamblers_ruin_bound, m)?)?;
    Ok(())
}
