//! Python bindings. Models travel as the same JSON documents the CLI reads,
//! policies as `[a0, a1, ...]` (deterministic) or `[[(a, p), ...], ...]`
//! (randomized), and structured results as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use satrisk::evaluate::{self, Cdf, GridSpec, Pipeline};
use satrisk::mdp::{self, io as model_io, Mdp, Mrp};
use satrisk::simulate::{self as sim, SimConfig};
use satrisk::transform::{self as sat, io as sat_io};
use satrisk::{inventory, Error};

create_exception!(satrisk_py, SatriskError, PyException);
create_exception!(satrisk_py, ResourceCapError, SatriskError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        e @ (Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Config(_)) => {
            PyValueError::new_err(e.to_string())
        }
        e @ Error::CapExceeded { .. } => ResourceCapError::new_err(e.to_string()),
        e => SatriskError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for satrisk::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[derive(FromPyObject)]
enum PolicyArg {
    Deterministic(Vec<usize>),
    Randomized(Vec<Vec<(usize, f64)>>),
}

impl From<PolicyArg> for mdp::Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Deterministic(a) => mdp::Policy::Deterministic(a),
            PolicyArg::Randomized(a) => mdp::Policy::Randomized(a),
        }
    }
}

fn pipeline(name: &str) -> PyResult<Pipeline> {
    name.parse().py_err()
}

/// A finite MDP or Markov reward process.
#[pyclass(name = "Model", module = "satrisk_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: mdp::Model,
}

impl PyModel {
    fn mdp(&self) -> PyResult<&Mdp> {
        match &self.inner {
            mdp::Model::Mdp(m) => Ok(m),
            mdp::Model::Mrp(_) => Err(PyValueError::new_err("expected an MDP")),
        }
    }

    /// The MRP to evaluate: the model itself, or the MDP under `policy`.
    fn mrp(&self, policy: Option<PolicyArg>) -> PyResult<Mrp> {
        match (&self.inner, policy) {
            (mdp::Model::Mrp(m), None) => Ok(m.clone()),
            (mdp::Model::Mrp(_), Some(_)) => Err(PyValueError::new_err("a policy only applies to MDPs")),
            (mdp::Model::Mdp(_), None) => Err(PyValueError::new_err("an MDP needs a policy")),
            (mdp::Model::Mdp(m), Some(p)) => mdp::induce_mrp(m, &p.into()).py_err(),
        }
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: model_io::parse_model(text).py_err()?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: model_io::read_model(path).py_err()?,
        })
    }

    fn to_json(&self) -> String {
        model_io::model_to_json(&self.inner)
    }

    /// Violation messages; empty when the model is valid.
    fn validate(&self) -> Vec<String> {
        mdp::validate(&self.inner).iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn is_mdp(&self) -> bool {
        matches!(self.inner, mdp::Model::Mdp(_))
    }

    #[getter]
    fn n_states(&self) -> usize {
        match &self.inner {
            mdp::Model::Mdp(m) => m.n_states(),
            mdp::Model::Mrp(m) => m.n_states(),
        }
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn reward_kind(&self) -> String {
        format!("{:?}", self.inner.reward().kind())
    }

    /// MRP induced by `policy` on an MDP.
    fn induce(&self, policy: PolicyArg) -> PyResult<PyModel> {
        Ok(PyModel {
            inner: mdp::induce_mrp(self.mdp()?, &policy.into()).py_err()?.into(),
        })
    }

    fn simplify(&self) -> PyResult<PyModel> {
        Ok(PyModel {
            inner: sat::simplify_reward(&self.inner).py_err()?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({}, states={}, reward={}, gamma={})",
            if self.is_mdp() { "mdp" } else { "mrp" },
            self.n_states(),
            self.reward_kind(),
            self.gamma()
        )
    }
}

/// Output of a state-augmentation transform.
#[pyclass(name = "SatResult", module = "satrisk_py", frozen)]
pub struct PySatResult {
    inner: sat::SatResult,
}

#[pymethods]
impl PySatResult {
    #[getter]
    fn case(&self) -> u8 {
        self.inner.case.into()
    }

    #[getter]
    fn compensated(&self) -> bool {
        self.inner.compensated
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel {
            inner: self.inner.model.clone(),
        }
    }

    #[getter]
    fn delay(&self) -> usize {
        self.inner.delay()
    }

    fn state_labels(&self) -> Vec<String> {
        self.inner.state_map.labels()
    }

    /// Maps a policy of the original MDP onto the augmented states.
    fn map_policy<'py>(&self, py: Python<'py>, policy: PolicyArg) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &sat::map_policy(&policy.into(), &self.inner.state_map).py_err()?)
    }

    fn to_json(&self) -> String {
        sat_io::sat_to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.state_map.len()
    }
}

/// Apply the transform for `case` (0-3). Case 2 needs `policy`.
#[pyfunction]
#[pyo3(signature = (model, case, policy=None, compensate=true))]
fn transform(model: &PyModel, case: u8, policy: Option<PolicyArg>, compensate: bool) -> PyResult<PySatResult> {
    let inner = match case {
        0 | 1 => {
            let m = model.mrp(None)?;
            if case == 0 {
                sat::sat_case0(&m)
            } else {
                sat::sat_case1(&m)
            }
        }
        2 => {
            let p = policy.ok_or_else(|| PyValueError::new_err("case 2 needs a policy"))?;
            sat::sat_case2(model.mdp()?, &p.into(), compensate)
        }
        3 => sat::sat_case3(model.mdp()?, compensate),
        other => return Err(PyValueError::new_err(format!("unknown case {other}"))),
    }
    .py_err()?;
    Ok(PySatResult { inner })
}

/// Return distribution: analytic (normal mixture) or empirical (samples).
#[pyclass(name = "ReturnDistribution", module = "satrisk_py", frozen)]
pub struct PyDistribution {
    inner: evaluate::ReturnDistribution,
}

#[pymethods]
impl PyDistribution {
    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    #[getter]
    fn is_empirical(&self) -> bool {
        matches!(self.inner, evaluate::ReturnDistribution::Empirical { .. })
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.inner)
    }
}

/// Per-state mean `v`, variance `psi`, and totals under the initial distribution.
#[pyfunction]
#[pyo3(signature = (model, policy=None, pipeline="transform"))]
fn sobel<'py>(
    py: Python<'py>,
    model: &PyModel,
    policy: Option<PolicyArg>,
    pipeline: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mrp = evaluable(model, policy, pipeline)?;
    let s = evaluate::sobel(&mrp).py_err()?;
    let (mean, variance) = (s.mean(mrp.initial()), s.variance(mrp.initial()));
    json_to_py(
        py,
        &serde_json::json!({ "v": s.v, "psi": s.psi, "mean": mean, "variance": variance }),
    )
}

fn evaluable(model: &PyModel, policy: Option<PolicyArg>, pipeline_name: &str) -> PyResult<Mrp> {
    let p = pipeline(pipeline_name)?;
    match (&model.inner, policy) {
        (mdp::Model::Mdp(m), Some(pol)) => evaluate::policy_mrp(m, &pol.into(), p).py_err(),
        (_, policy) => evaluate::evaluable_mrp(&model.mrp(policy)?, p).py_err(),
    }
}

#[pyfunction]
#[pyo3(signature = (model, policy=None, pipeline="transform"))]
fn analytic_distribution(model: &PyModel, policy: Option<PolicyArg>, pipeline: &str) -> PyResult<PyDistribution> {
    let mrp = evaluable(model, policy, pipeline)?;
    Ok(PyDistribution {
        inner: evaluate::analytic_distribution(&mrp).py_err()?,
    })
}

/// Pooled Monte Carlo returns (batches × per_batch trajectories).
#[pyfunction]
#[pyo3(signature = (model, policy=None, horizon=1000, batches=50, per_batch=200, seed=0))]
fn simulate(
    py: Python<'_>,
    model: &PyModel,
    policy: Option<PolicyArg>,
    horizon: usize,
    batches: usize,
    per_batch: usize,
    seed: u64,
) -> PyResult<PyDistribution> {
    let mrp = model.mrp(policy)?;
    let cfg = SimConfig {
        horizon,
        batches,
        trajectories_per_batch: per_batch,
        seed,
    };
    let e = py
        .detach(|| sim::empirical_distribution(&mrp, &cfg))
        .py_err()?;
    Ok(PyDistribution { inner: e.pooled() })
}

/// Pointwise infimum of return CDFs over all deterministic policies.
#[pyclass(name = "VarFunction", module = "satrisk_py", frozen)]
pub struct PyVarFunction {
    inner: evaluate::VarFunction,
}

#[pymethods]
impl PyVarFunction {
    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    /// Largest threshold whose worst-case exceedance probability is ≥ alpha.
    fn threshold(&self, alpha: f64) -> PyResult<f64> {
        evaluate::var_threshold(&self.inner, alpha).py_err()
    }

    /// Best achievable probability of a return above `tau`.
    fn quantile(&self, tau: f64) -> PyResult<f64> {
        evaluate::var_quantile(&self.inner, tau).py_err()
    }

    fn argmin_policies<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let chosen: Vec<&mdp::Policy> = self.inner.argmin.iter().map(|&i| &self.inner.policies[i]).collect();
        json_to_py(py, &chosen)
    }
}

#[pyfunction]
#[pyo3(signature = (model, pipeline="transform", grid_points=evaluate::DEFAULT_GRID_POINTS, policy_cap=evaluate::DEFAULT_POLICY_CAP))]
fn var_function(model: &PyModel, pipeline: &str, grid_points: usize, policy_cap: u128) -> PyResult<PyVarFunction> {
    let p = self::pipeline(pipeline)?;
    Ok(PyVarFunction {
        inner: evaluate::var_function(model.mdp()?, &GridSpec::Auto(grid_points), p, policy_cap).py_err()?,
    })
}

fn as_cdf<'a>(obj: &'a Bound<'_, PyAny>) -> PyResult<Box<dyn Cdf + Send + 'a>> {
    if let Ok(d) = obj.cast::<PyDistribution>() {
        return Ok(Box::new(d.get().inner.clone()));
    }
    if let Ok(v) = obj.cast::<PyVarFunction>() {
        return Ok(Box::new(v.get().inner.clone()));
    }
    Err(PyValueError::new_err("expected a ReturnDistribution or VarFunction"))
}

/// Kolmogorov–Smirnov distance between two distributions or VaR functions.
#[pyfunction]
fn ks_distance(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<f64> {
    let (fa, fb) = (as_cdf(a)?, as_cdf(b)?);
    sim::ks_distance(fa.as_ref(), fb.as_ref()).py_err()
}

/// Exact pmf of the return truncated at `horizon`, as `(value, prob)` pairs.
#[pyfunction]
#[pyo3(signature = (model, horizon, policy=None, cap=1_000_000))]
fn brute_force_return_pmf(
    model: &PyModel,
    horizon: usize,
    policy: Option<PolicyArg>,
    cap: u128,
) -> PyResult<Vec<(f64, f64)>> {
    let pmf = match (&model.inner, policy) {
        (mdp::Model::Mdp(m), Some(p)) => sim::brute_force_return_pmf_policy(m, &p.into(), horizon, cap),
        (_, policy) => sim::brute_force_return_pmf(&model.mrp(policy)?, horizon, cap),
    }
    .py_err()?;
    Ok(pmf.atoms().to_vec())
}

/// The inventory-control MDP; `params` is a JSON object overriding defaults.
#[pyfunction]
#[pyo3(signature = (params=None))]
fn inventory_mdp(params: Option<&str>) -> PyResult<PyModel> {
    let p: inventory::InventoryParams = match params {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => Default::default(),
    };
    Ok(PyModel {
        inner: inventory::build_inventory_mdp(&p).py_err()?.into(),
    })
}

/// Writes the inventory reconstruction into `outdir`; returns the summary.
#[pyfunction]
#[pyo3(signature = (outdir, seed=None))]
fn paper_pipeline<'py>(py: Python<'py>, outdir: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = inventory::PaperConfig::default();
    if let Some(s) = seed {
        cfg.sim.seed = s;
    }
    let report = py
        .detach(|| inventory::paper_pipeline(outdir, &cfg))
        .py_err()?;
    json_to_py(py, &report.summary)
}

#[pymodule]
fn satrisk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SatriskError", m.py().get_type::<SatriskError>())?;
    m.add("ResourceCapError", m.py().get_type::<ResourceCapError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PySatResult>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyVarFunction>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(sobel, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(var_function, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_return_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(inventory_mdp, m)?)?;
    m.add_function(wrap_pyfunction!(paper_pipeline, m)?)?;
    Ok(())
}
