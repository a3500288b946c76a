//! A model bound to its data: the objective explored by the sampler.

use std::sync::Arc;

use crate::constraint::{normalize, reduce_over_trajectory, ConstraintStatement, Normalized, ReducedBinding};
use crate::error::{Error, Result};
use crate::likelihood::{
    chi_squared_nll, static_penalty, total_nll, QualitativeObservation, QuantitativePoint, StaticPenaltyTerm,
};
use crate::model::{Model, Protocol, Trajectory};
use crate::sampler::Target;

/// Which objective a [`Problem`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Negative log likelihood; `weight` statements are rejected.
    #[default]
    Likelihood,
    /// Static penalty; likelihood statements count with weight 1.
    Penalty,
}

/// Model, protocol and data, evaluated as a function of the parameters.
#[derive(Clone)]
pub struct Problem {
    model: Arc<dyn Model>,
    protocol: Protocol,
    objective: Objective,
    quantitative: Vec<QuantitativePoint>,
    qualitative: Vec<QualitativeObservation>,
    penalties: Vec<StaticPenaltyTerm>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("model", &self.model.name())
            .field("protocol", &self.protocol)
            .field("objective", &self.objective)
            .field("quantitative", &self.quantitative.len())
            .field("qualitative", &self.qualitative.len())
            .field("penalties", &self.penalties.len())
            .finish()
    }
}

impl Problem {
    /// Normalizes `statements` and checks every observable and enforcement
    /// time against the model's outputs on `protocol`.
    pub fn new(
        model: Arc<dyn Model>,
        protocol: Protocol,
        quantitative: Vec<QuantitativePoint>,
        statements: &[ConstraintStatement],
        objective: Objective,
    ) -> Result<Self> {
        let mut qualitative = Vec::new();
        let mut penalties = Vec::new();
        for stmt in statements {
            match (normalize(stmt)?, objective) {
                (Normalized::Likelihood(o), Objective::Likelihood) => qualitative.push(o),
                (Normalized::Likelihood(o), Objective::Penalty) => penalties.push(StaticPenaltyTerm {
                    binding: o.binding,
                    threshold: o.threshold,
                    weight: 1.0,
                }),
                (Normalized::Penalty(p), Objective::Penalty) => penalties.push(p),
                (Normalized::Penalty(_), Objective::Likelihood) => {
                    return Err(Error::Config(format!(
                        "line {}: `weight` statements define a static penalty and have no likelihood; \
                         use confidence or pmin/pmax, or switch the objective to penalty",
                        stmt.span.line
                    )))
                }
            }
        }
        let problem = Self {
            model,
            protocol,
            objective,
            quantitative,
            qualitative,
            penalties,
        };
        problem.preflight()?;
        Ok(problem)
    }

    fn preflight(&self) -> Result<()> {
        let available = self.model.observables(&self.protocol);
        let (start, end) = (self.protocol.times[0], *self.protocol.times.last().unwrap());
        let check_time = |context: String, t: f64| {
            if t < start || t > end {
                Err(Error::OutOfRange {
                    context,
                    time: t,
                    start,
                    end,
                })
            } else {
                Ok(())
            }
        };
        for p in &self.quantitative {
            if !available.contains(&p.observable) {
                return Err(Error::MissingObservable(p.observable.clone()));
            }
            check_time(format!("quantitative point for `{}`", p.observable), p.enforcement_time)?;
        }
        let bindings = self
            .qualitative
            .iter()
            .map(|o| &o.binding)
            .chain(self.penalties.iter().map(|p| &p.binding));
        for b in bindings {
            if let Some(name) = b.expression.observables().find(|n| !available.iter().any(|a| a == n)) {
                return Err(Error::MissingObservable(name.to_string()));
            }
            use crate::constraint::Reduction::*;
            match b.reduction {
                AtTime(t) => check_time(format!("constraint on {b}"), t)?,
                Max(Some(w)) | Min(Some(w)) => {
                    check_time(format!("constraint on {b}"), w.0)?;
                    check_time(format!("constraint on {b}"), w.1)?;
                }
                Max(None) | Min(None) => {}
            }
        }
        Ok(())
    }

    pub fn model(&self) -> &dyn Model {
        self.model.as_ref()
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn objective_kind(&self) -> Objective {
        self.objective
    }

    pub fn quantitative(&self) -> &[QuantitativePoint] {
        &self.quantitative
    }

    pub fn qualitative(&self) -> &[QualitativeObservation] {
        &self.qualitative
    }

    pub fn penalties(&self) -> &[StaticPenaltyTerm] {
        &self.penalties
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.model.parameter_names()
    }

    pub fn simulate(&self, theta: &[f64]) -> Trajectory {
        self.model.simulate(theta, &self.protocol)
    }

    /// Negative log likelihood of all quantitative and qualitative data.
    pub fn nll(&self, theta: &[f64]) -> Result<f64> {
        let traj = self.simulate(theta);
        Ok(total_nll(&self.quantitative, &self.qualitative, &traj)?.value())
    }

    /// Static penalty plus the chi-squared misfit of quantitative data.
    pub fn penalty(&self, theta: &[f64]) -> Result<f64> {
        let traj = self.simulate(theta);
        if traj.failure().is_some() {
            return Ok(f64::INFINITY);
        }
        let preds = self
            .quantitative
            .iter()
            .map(|p| traj.value_at(&p.observable, p.enforcement_time))
            .collect::<Result<Vec<_>>>()?;
        let chi = chi_squared_nll(&self.quantitative, &preds)?.value();
        let g = self
            .penalties
            .iter()
            .map(|p| Ok((reduced_minus(&p.binding, p.threshold, &traj)?, p.weight)))
            .collect::<Result<Vec<_>>>()?;
        Ok(chi + static_penalty(&g))
    }

    /// The configured objective; runtime errors are logged and count as +inf.
    pub fn evaluate(&self, theta: &[f64]) -> f64 {
        let value = match self.objective {
            Objective::Likelihood => self.nll(theta),
            Objective::Penalty => self.penalty(theta),
        };
        value.unwrap_or_else(|e| {
            log::warn!("objective evaluation failed at {theta:?}: {e}");
            f64::INFINITY
        })
    }
}

fn reduced_minus(binding: &ReducedBinding, threshold: f64, traj: &Trajectory) -> Result<f64> {
    Ok(reduce_over_trajectory(binding, traj)? - threshold)
}

impl Target for Problem {
    fn objective(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta)
    }
}
