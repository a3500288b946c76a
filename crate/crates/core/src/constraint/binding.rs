use std::fmt;

use crate::error::{Error, Result};
use crate::model::{interpolate, Trajectory};

/// Signed sum of observables, e.g. `B - A` or `-A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearExpr {
    pub terms: Vec<(f64, String)>,
}

impl LinearExpr {
    pub fn negated(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(c, n)| (-c, n.clone())).collect(),
        }
    }

    pub fn observables(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(_, n)| n.as_str())
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, name)) in self.terms.iter().enumerate() {
            match (i, *c < 0.0) {
                (0, true) => write!(f, "-{name}")?,
                (0, false) => f.write_str(name)?,
                (_, true) => write!(f, " - {name}")?,
                (_, false) => write!(f, " + {name}")?,
            }
        }
        Ok(())
    }
}

/// How the expression is collapsed to one scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    /// Value at a time point, linearly interpolated.
    AtTime(f64),
    /// Maximum over the window (whole trajectory when `None`); from `always`.
    Max(Option<(f64, f64)>),
    /// Minimum over the window; from `once`.
    Min(Option<(f64, f64)>),
}

/// A scalar functional of a trajectory, oriented so "reduced < threshold" is the observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBinding {
    pub expression: LinearExpr,
    pub reduction: Reduction,
}

impl fmt::Display for ReducedBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let window = |w: &Option<(f64, f64)>| match w {
            Some((a, b)) => format!(" over [{a}, {b}]"),
            None => String::new(),
        };
        match &self.reduction {
            Reduction::AtTime(t) => write!(f, "({}) at t={t}", self.expression),
            Reduction::Max(w) => write!(f, "max({}){}", self.expression, window(w)),
            Reduction::Min(w) => write!(f, "min({}){}", self.expression, window(w)),
        }
    }
}

/// Evaluates `binding` on `traj`.
///
/// Windowed reductions use the interpolated values at both window ends plus
/// every grid point strictly inside. A failed trajectory reduces to NaN.
pub fn reduce_over_trajectory(binding: &ReducedBinding, traj: &Trajectory) -> Result<f64> {
    if traj.failure().is_some() {
        return Ok(f64::NAN);
    }
    let series = binding
        .expression
        .terms
        .iter()
        .map(|(c, name)| traj.series(name).map(|s| (*c, s)))
        .collect::<Result<Vec<_>>>()?;
    let times = traj.times();
    let check = |t: f64| {
        if traj.contains_time(t) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                context: format!("constraint on {binding}"),
                time: t,
                start: traj.start(),
                end: traj.end(),
            })
        }
    };
    let at = |t: f64| -> f64 { series.iter().map(|(c, s)| c * interpolate(times, s, t)).sum() };
    let at_index = |i: usize| -> f64 { series.iter().map(|(c, s)| c * s[i]).sum() };

    let (window, take_max) = match binding.reduction {
        Reduction::AtTime(t) => {
            check(t)?;
            return Ok(at(t));
        }
        Reduction::Max(w) => (w, true),
        Reduction::Min(w) => (w, false),
    };
    let mut values: Vec<f64> = Vec::new();
    match window {
        None => values.extend((0..times.len()).map(at_index)),
        Some((a, b)) => {
            check(a)?;
            check(b)?;
            values.push(at(a));
            values.extend(
                times
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| t > a && t < b)
                    .map(|(i, _)| at_index(i)),
            );
            values.push(at(b));
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        return Ok(f64::NAN);
    }
    let fold = if take_max { f64::max } else { f64::min };
    let init = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
    Ok(values.into_iter().fold(init, fold))
}
