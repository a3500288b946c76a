//! Deterministic simulation models and the trajectories they produce.

mod decay;
mod rk4;
mod toy;

use std::collections::BTreeMap;

pub use decay::DecayOdeModel;
pub use rk4::rk4_integrate;
pub use toy::BiphasicToyModel;

use crate::error::{Error, Result};

/// A named model parameter with its default value.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub default: f64,
}

impl Parameter {
    pub fn new(name: &str, default: f64) -> Self {
        Self {
            name: name.to_string(),
            default,
        }
    }
}

/// Simulation protocol: the output time grid and the fixed integrator step.
///
/// For the biphasic toy model the "time" axis is the delay between stimuli.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub times: Vec<f64>,
    pub step: f64,
}

impl Protocol {
    pub fn new(mut times: Vec<f64>, step: f64) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("protocol times must be finite and >= 0".into()));
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.is_empty() {
            return Err(Error::Config("protocol needs at least one time point".into()));
        }
        if !(step > 0.0) {
            return Err(Error::Config(format!("integrator step must be positive, got {step}")));
        }
        Ok(Self { times, step })
    }

    /// Uniform grid `0, dt, 2 dt, ..., t_end`.
    pub fn uniform(t_end: f64, dt: f64, step: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::Config("grid spacing and end time must be positive".into()));
        }
        let n = (t_end / dt).round() as usize;
        Self::new((0..=n).map(|i| i as f64 * dt).collect(), step)
    }
}

/// `count` delays spaced geometrically over `(0, max]`: `max^(k / count)` for `k = 1..=count`.
///
/// When `count` is a power of two the grids are nested: every delay of the
/// smaller grid appears bit-identically in the larger one.
pub fn geometric_delays(count: usize, max: f64) -> Vec<f64> {
    (1..=count).map(|k| max.powf(k as f64 / count as f64)).collect()
}

/// Time grid plus named observable series.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    series: BTreeMap<String, Vec<f64>>,
    failure: Option<String>,
}

impl Trajectory {
    /// Builds a trajectory; non-finite values mark it as failed rather than erroring.
    pub fn new(times: Vec<f64>, series: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("trajectory times must be strictly increasing".into()));
        }
        if let Some((name, _)) = series.iter().find(|(_, v)| v.len() != times.len()) {
            return Err(Error::Config(format!(
                "series `{name}` length does not match the time grid"
            )));
        }
        let failure = series
            .iter()
            .find(|(_, v)| v.iter().any(|x| !x.is_finite()))
            .map(|(name, _)| format!("non-finite value in `{name}`"));
        Ok(Self { times, series, failure })
    }

    pub fn failed(times: Vec<f64>, reason: impl Into<String>) -> Self {
        Self {
            times,
            series: BTreeMap::new(),
            failure: Some(reason.into()),
        }
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn observables(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.series
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingObservable(name.to_string()))
    }

    pub fn start(&self) -> f64 {
        self.times.first().copied().unwrap_or(f64::NAN)
    }

    pub fn end(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.start() && t <= self.end()
    }

    /// Value of `name` at `t`, linearly interpolated between grid points.
    pub fn value_at(&self, name: &str, t: f64) -> Result<f64> {
        let values = self.series(name)?;
        if !self.contains_time(t) {
            return Err(Error::OutOfRange {
                context: format!("observable `{name}`"),
                time: t,
                start: self.start(),
                end: self.end(),
            });
        }
        Ok(interpolate(&self.times, values, t))
    }
}

pub(crate) fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&x| x < t);
    if i < times.len() && times[i] == t {
        return values[i];
    }
    // t lies strictly between times[i-1] and times[i]
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// A deterministic simulation model.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    fn parameters(&self) -> &[Parameter];

    /// Names of every observable produced for `protocol`.
    fn observables(&self, protocol: &Protocol) -> Vec<String>;

    /// Simulates `theta` (natural units, in `parameters()` order).
    ///
    /// Integration failures or out-of-domain parameters yield a failed trajectory.
    fn simulate(&self, theta: &[f64], protocol: &Protocol) -> Trajectory;

    fn parameter_names(&self) -> Vec<String> {
        self.parameters().iter().map(|p| p.name.clone()).collect()
    }

    fn defaults(&self) -> Vec<f64> {
        self.parameters().iter().map(|p| p.default).collect()
    }
}

/// Looks up a built-in model by name.
pub fn builtin(name: &str) -> Option<Box<dyn Model>> {
    match name {
        "biphasic" | "biphasic-toy" => Some(Box::new(BiphasicToyModel::default())),
        "decay" | "decay-ode" => Some(Box::new(DecayOdeModel)),
        _ => None,
    }
}

pub(crate) fn check_theta(model: &dyn Model, theta: &[f64]) -> std::result::Result<(), String> {
    let params = model.parameters();
    if theta.len() != params.len() {
        return Err(format!(
            "{} expects {} parameters, got {}",
            model.name(),
            params.len(),
            theta.len()
        ));
    }
    if let Some((p, v)) = params.iter().zip(theta).find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(format!("parameter {} = {v} is outside its non-negative domain", p.name));
    }
    Ok(())
}
