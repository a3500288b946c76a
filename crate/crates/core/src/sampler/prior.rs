use std::fmt;

use crate::error::{Error, Result};

/// Prior on one parameter. Both kinds are uniform in sampling space:
/// natural units for `Uniform`, log10 units for `LogUniform`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
}

impl Prior {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("uniform prior needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn log_uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !(lo < hi) || !hi.is_finite() {
            return Err(Error::Config(format!(
                "log-uniform prior needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::LogUniform { lo, hi })
    }

    /// Bounds in sampling space.
    pub fn sampling_bounds(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::LogUniform { lo, hi } => (lo.log10(), hi.log10()),
        }
    }

    pub fn to_sampling(&self, natural: f64) -> f64 {
        match self {
            Self::Uniform { .. } => natural,
            Self::LogUniform { .. } => natural.log10(),
        }
    }

    pub fn to_natural(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { .. } => x,
            Self::LogUniform { .. } => 10f64.powf(x),
        }
    }

    pub fn contains_sampling(&self, x: f64) -> bool {
        let (lo, hi) = self.sampling_bounds();
        x >= lo && x <= hi
    }

    /// Log density in sampling space, up to a constant: 0 inside, -inf outside.
    pub fn log_density_sampling(&self, x: f64) -> f64 {
        if self.contains_sampling(x) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// CDF of the prior in sampling space.
    pub fn sampling_cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.sampling_bounds();
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn is_log(&self) -> bool {
        matches!(self, Self::LogUniform { .. })
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lo, hi } => write!(f, "uniform {lo} {hi}"),
            Self::LogUniform { lo, hi } => write!(f, "loguniform {lo} {hi}"),
        }
    }
}

impl std::str::FromStr for Prior {
    type Err = Error;

    /// Parses `uniform LO HI` or `loguniform LO HI`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let bad = || {
            Error::Config(format!(
                "invalid prior `{s}`; expected `uniform LO HI` or `loguniform LO HI`"
            ))
        };
        let [kind, lo, hi] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        match *kind {
            "uniform" => Self::uniform(lo, hi),
            "loguniform" | "log-uniform" | "log_uniform" => Self::log_uniform(lo, hi),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_uniform_maps_through_log10() {
        let p = Prior::log_uniform(0.1, 10.0).unwrap();
        assert_eq!(p.sampling_bounds(), (-1.0, 1.0));
        assert!((p.to_natural(p.to_sampling(3.0)) - 3.0).abs() < 1e-12);
        assert_eq!(p.log_density_sampling(1.5), f64::NEG_INFINITY);
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Prior::uniform(1.0, 1.0).is_err());
        assert!(Prior::log_uniform(0.0, 1.0).is_err());
        assert!("uniform 0 1".parse::<Prior>().is_ok());
        assert!("gamma 0 1".parse::<Prior>().is_err());
    }
}
