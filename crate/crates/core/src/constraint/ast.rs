use std::fmt;

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Observable(String),
    Literal(f64),
}

impl Operand {
    pub fn observable(&self) -> Option<&str> {
        match self {
            Self::Observable(name) => Some(name),
            Self::Literal(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    /// True for `<` and `<=`.
    pub fn is_less(self) -> bool {
        matches!(self, Self::Lt | Self::Le)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Gt => ">",
            Self::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnforcementMode {
    AtTime(f64),
    Always,
    Once,
}

/// When the inequality must hold. `window` is only meaningful for `Always`/`Once`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enforcement {
    pub mode: EnforcementMode,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Qualifier {
    /// Static penalty weight `C`.
    Weight(f64),
    /// Symmetric two-category likelihood; `confidence = 1 - 2 eps`.
    Likelihood { confidence: f64, tolerance: f64 },
    /// Asymmetric likelihood bounded by the minimum and maximum report probability.
    LikelihoodAsym { pmin: f64, pmax: f64, tolerance: f64 },
}

/// One parsed constraint statement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStatement {
    pub lhs: Operand,
    pub op: RelOp,
    pub rhs: Operand,
    pub enforcement: Enforcement,
    pub qualifier: Qualifier,
    pub group: Option<String>,
    pub span: Span,
}

impl ConstraintStatement {
    /// Copy with the source span cleared, for structural comparison.
    pub fn without_span(&self) -> Self {
        Self {
            span: Span::default(),
            ..self.clone()
        }
    }

    pub fn observables(&self) -> impl Iterator<Item = &str> {
        self.lhs.observable().into_iter().chain(self.rhs.observable())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Observable(name) => f.write_str(name),
            Self::Literal(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Enforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            EnforcementMode::AtTime(t) => return write!(f, "at time={t}"),
            EnforcementMode::Always => f.write_str("always")?,
            EnforcementMode::Once => f.write_str("once")?,
        }
        if let Some((a, b)) = self.window {
            write!(f, " between time={a},time={b}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Weight(w) => write!(f, "weight {w}"),
            Self::Likelihood { confidence, tolerance } => write!(f, "confidence {confidence} tolerance {tolerance}"),
            Self::LikelihoodAsym { pmin, pmax, tolerance } => {
                write!(f, "pmin {pmin} pmax {pmax} tolerance {tolerance}")
            }
        }
    }
}

impl fmt::Display for ConstraintStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{} {} {}",
            self.lhs,
            self.op.as_str(),
            self.rhs,
            self.enforcement,
            self.qualifier
        )?;
        if let Some(g) = &self.group {
            write!(f, " group {g}")?;
        }
        Ok(())
    }
}
