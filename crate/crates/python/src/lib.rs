//! Python bindings: constraint parsing, likelihood terms, the built-in
//! models, synthetic datasets, sampling and posterior summaries.

use std::collections::HashMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qualifit::analysis;
use qualifit::constraint::{self, ConstraintStatement, Normalized};
use qualifit::likelihood::{self, QuantitativePoint};
use qualifit::model::{builtin, geometric_delays, BiphasicToyModel, Model, Protocol};
use qualifit::sampler::{self, PosteriorSamples, Prior, SamplerConfig};
use qualifit::synthetic::{self, CategoryMode, SigmaRule, SyntheticSpec};
use qualifit::{Error, Objective};

/// `(observable, time, value, sigma)`.
type Row = (String, f64, f64, f64);
/// `(name, mean, median, lo, hi)`.
type SummaryRow = (String, f64, f64, f64, f64);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_error(e: Error) -> PyErr {
    match e {
        Error::Simulation(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        other => value_error(other),
    }
}

/// One parsed constraint statement.
#[pyclass(frozen, module = "pyqualifit")]
#[derive(Clone)]
pub struct Constraint {
    stmt: ConstraintStatement,
    normalized: Normalized,
}

impl Constraint {
    fn from_statement(stmt: ConstraintStatement) -> PyResult<Self> {
        let normalized = constraint::normalize(&stmt).map_err(value_error)?;
        Ok(Self { stmt, normalized })
    }

    fn reduced(&self, values: &HashMap<String, f64>) -> PyResult<f64> {
        self.normalized
            .binding()
            .expression
            .terms
            .iter()
            .map(|(k, name)| {
                values
                    .get(name)
                    .map(|v| k * v)
                    .ok_or_else(|| value_error(format!("no value for observable `{name}`")))
            })
            .sum()
    }

    fn observation(&self) -> PyResult<&likelihood::QualitativeObservation> {
        match &self.normalized {
            Normalized::Likelihood(o) => Ok(o),
            Normalized::Penalty(_) => Err(value_error("`weight` statements have no likelihood")),
        }
    }
}

#[pymethods]
impl Constraint {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Self::from_statement(constraint::parse_line(text).map_err(value_error)?)
    }

    /// Observables referenced by the statement.
    #[getter]
    fn observables(&self) -> Vec<String> {
        self.stmt.observables().map(str::to_string).collect()
    }

    /// `True` for confidence or pmin/pmax statements, `False` for `weight`.
    #[getter]
    fn has_likelihood(&self) -> bool {
        matches!(self.normalized, Normalized::Likelihood(_))
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.normalized.threshold()
    }

    /// Equivalent statement in the one-sided `... < c` form.
    fn normalized(&self) -> String {
        self.normalized.to_statement().to_string()
    }

    /// Probability that the statement is reported satisfied given observable values.
    fn probability(&self, values: HashMap<String, f64>) -> PyResult<f64> {
        Ok(self.observation()?.probability(self.reduced(&values)?))
    }

    /// Negative log of [`probability`].
    fn term(&self, values: HashMap<String, f64>) -> PyResult<f64> {
        Ok(self.observation()?.term(self.reduced(&values)?))
    }

    fn __str__(&self) -> String {
        self.stmt.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Constraint({:?})", self.stmt.to_string())
    }
}

/// Parses one statement per line; errors carry line and column.
#[pyfunction]
fn parse_constraints(text: &str) -> PyResult<Vec<Constraint>> {
    constraint::parse_constraints(text)
        .map_err(value_error)?
        .into_iter()
        .map(Constraint::from_statement)
        .collect()
}

#[pyfunction]
fn gaussian_cdf(mu: f64, sigma: f64, x: f64) -> f64 {
    likelihood::gaussian_cdf(mu, sigma, x)
}

#[pyfunction]
fn many_category_term(eps_plus: f64, eps_minus: f64, sigma: f64, threshold: f64, prediction: f64) -> f64 {
    likelihood::many_category_term(eps_plus, eps_minus, sigma, threshold, prediction)
}

#[pyfunction]
fn ordinal_probabilities(eps: f64, sigma: f64, thresholds: Vec<f64>, prediction: f64) -> Vec<f64> {
    likelihood::ordinal_probabilities(eps, sigma, &thresholds, prediction)
}

#[pyfunction]
#[pyo3(signature = (count, max_delay = 64.0))]
fn delays(count: usize, max_delay: f64) -> Vec<f64> {
    geometric_delays(count, max_delay)
}

/// Synthetic dataset from the biphasic toy model at its ground truth.
///
/// Returns `(statements, rows)` where rows are `(observable, time, value, sigma)`.
#[pyfunction]
#[pyo3(signature = (mode, delays, seed = 0, noise_sigma = None, threshold = None, sigma_rule = "sum"))]
fn generate(
    mode: &str,
    delays: Vec<f64>,
    seed: u64,
    noise_sigma: Option<f64>,
    threshold: Option<f64>,
    sigma_rule: &str,
) -> PyResult<(Vec<String>, Vec<Row>)> {
    let mode = match mode {
        "quantitative" => CategoryMode::Quantitative,
        "two-category" => CategoryMode::TwoCategory,
        "three-category" => CategoryMode::ThreeCategory { threshold },
        other => return Err(value_error(format!("unknown mode `{other}`"))),
    };
    let mut spec = SyntheticSpec::new(delays, mode, seed);
    if let Some(s) = noise_sigma {
        spec.noise_sigma = s;
    }
    spec.sigma_rule = sigma_rule.parse::<SigmaRule>().map_err(core_error)?;
    let data = synthetic::generate(&spec).map_err(core_error)?;
    let rows = data
        .quantitative
        .into_iter()
        .map(|p| (p.observable, p.enforcement_time, p.value, p.sigma))
        .collect();
    Ok((data.statements, rows))
}

/// Ground-truth parameters of the biphasic toy model.
#[pyfunction]
fn ground_truth() -> Vec<f64> {
    BiphasicToyModel::GROUND_TRUTH.to_vec()
}

/// A built-in model bound to its data.
#[pyclass(frozen, module = "pyqualifit")]
pub struct Problem {
    inner: qualifit::Problem,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (model, times, constraints = "", quantitative = Vec::new(), objective = "likelihood", band = None, step = 0.01))]
    fn new(
        model: &str,
        times: Vec<f64>,
        constraints: &str,
        quantitative: Vec<Row>,
        objective: &str,
        band: Option<f64>,
        step: f64,
    ) -> PyResult<Self> {
        let model: Arc<dyn Model> = match (model, band) {
            ("biphasic" | "biphasic-toy", band) => {
                Arc::new(BiphasicToyModel::new(band.unwrap_or(BiphasicToyModel::DEFAULT_BAND)))
            }
            (_, Some(_)) => return Err(value_error("band only applies to the biphasic model")),
            (name, None) => builtin(name)
                .map(Arc::from)
                .ok_or_else(|| value_error(format!("unknown model `{name}`")))?,
        };
        let objective = match objective {
            "likelihood" => Objective::Likelihood,
            "penalty" => Objective::Penalty,
            other => {
                return Err(value_error(format!(
                    "objective must be likelihood or penalty, got `{other}`"
                )))
            }
        };
        let statements = constraint::parse_constraints(constraints).map_err(value_error)?;
        let points = quantitative
            .into_iter()
            .map(|(o, t, v, s)| QuantitativePoint::new(o, t, v, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(core_error)?;
        let protocol = Protocol::new(times, step).map_err(core_error)?;
        let inner = qualifit::Problem::new(model, protocol, points, &statements, objective).map_err(core_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn parameter_names(&self) -> Vec<String> {
        self.inner.parameter_names()
    }

    fn nll(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.nll(&theta).map_err(core_error)
    }

    /// The configured objective; failed evaluations give `inf`.
    fn evaluate(&self, theta: Vec<f64>) -> f64 {
        self.inner.evaluate(&theta)
    }

    /// Simulated series per observable on the protocol's time grid.
    fn simulate(&self, theta: Vec<f64>) -> PyResult<HashMap<String, Vec<f64>>> {
        let traj = self.inner.simulate(&theta);
        if let Some(reason) = traj.failure() {
            return Err(PyRuntimeError::new_err(reason.to_string()));
        }
        traj.observables()
            .map(|n| Ok((n.to_string(), traj.series(n).map_err(core_error)?.to_vec())))
            .collect()
    }
}

fn parse_priors(priors: Vec<(String, f64, f64)>) -> PyResult<Vec<Prior>> {
    priors
        .into_iter()
        .map(|(kind, lo, hi)| match kind.as_str() {
            "uniform" => Prior::uniform(lo, hi).map_err(core_error),
            "loguniform" => Prior::log_uniform(lo, hi).map_err(core_error),
            other => Err(value_error(format!(
                "prior must be uniform or loguniform, got `{other}`"
            ))),
        })
        .collect()
}

/// Posterior draws at temperature 1.
#[pyclass(frozen, module = "pyqualifit")]
pub struct Samples {
    inner: PosteriorSamples,
    #[pyo3(get)]
    acceptance: Vec<f64>,
    #[pyo3(get)]
    swap_acceptance: Vec<f64>,
}

#[pymethods]
impl Samples {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner
            .column_by_name(name)
            .ok_or_else(|| value_error(format!("no parameter `{name}`")))
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut out = Vec::new();
        self.inner.write_csv(&mut out).map_err(core_error)?;
        Ok(String::from_utf8(out).expect("csv output is utf-8"))
    }

    /// `(name, mean, median, lo, hi)` per parameter, optionally in log10 units.
    #[pyo3(signature = (level = 0.95, log10 = false))]
    fn summary(&self, level: f64, log10: bool) -> PyResult<Vec<SummaryRow>> {
        let set = if log10 {
            analysis::log10_columns(&self.inner, self.inner.names()).map_err(core_error)?
        } else {
            self.inner.clone()
        };
        let summaries = analysis::summarize(&set, level, analysis::DEFAULT_BINS).map_err(core_error)?;
        Ok(summaries
            .into_iter()
            .map(|m| (m.name, m.mean, m.median, m.lo, m.hi))
            .collect())
    }
}

/// Parallel-tempering run; one `(kind, lo, hi)` prior per model parameter.
#[pyfunction]
#[pyo3(signature = (problem, priors, *, temperatures = 4, chains = 2, steps = 20000, burn_in = None, scale = vec![0.05], seed = 0, threads = None))]
#[allow(clippy::too_many_arguments)]
fn sample(
    py: Python<'_>,
    problem: &Problem,
    priors: Vec<(String, f64, f64)>,
    temperatures: usize,
    chains: usize,
    steps: usize,
    burn_in: Option<usize>,
    scale: Vec<f64>,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<Samples> {
    let priors = parse_priors(priors)?;
    let names = problem.inner.parameter_names();
    let dim = names.len();
    let mut cfg = SamplerConfig::new(temperatures, chains, steps, burn_in.unwrap_or(steps / 5), dim);
    cfg.proposal_scale = if scale.len() == 1 { vec![scale[0]; dim] } else { scale };
    cfg.seed = seed;
    cfg.threads = threads;
    let target = &problem.inner;
    let (inner, stats) = py
        .allow_threads(|| sampler::pt_run(&cfg, &priors, &names, target))
        .map_err(core_error)?;
    Ok(Samples {
        inner,
        acceptance: stats.acceptance,
        swap_acceptance: stats.swap_acceptance,
    })
}

#[pymodule]
fn pyqualifit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Constraint>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Samples>()?;
    m.add_function(wrap_pyfunction!(parse_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(many_category_term, m)?)?;
    m.add_function(wrap_pyfunction!(ordinal_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(delays, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(ground_truth, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}
