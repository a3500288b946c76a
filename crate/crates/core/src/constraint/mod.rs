//! Constraint specification language.
//!
//! One statement per line: an inequality, an enforcement condition and either
//! a static-penalty weight or likelihood parameters, e.g.
//!
//! ```text
//! A<4 at time=1 confidence 0.98 tolerance 0.5
//! A>B always between time=5,time=10 pmin 0.01 pmax 0.98 tolerance 0.5
//! ```

mod ast;
mod binding;
mod lexer;
mod normalize;
mod parser;
mod validate;

use std::fmt;

pub use ast::{ConstraintStatement, Enforcement, EnforcementMode, Operand, Qualifier, RelOp};
pub use binding::{reduce_over_trajectory, LinearExpr, ReducedBinding, Reduction};
pub use lexer::{tokenize, Keyword, Span, Token, TokenKind};
pub use normalize::{normalize, Normalized};
pub use parser::{parse_constraints, parse_constraints_all, parse_line, parse_statement};
pub use validate::{validate_category_family, FamilyWarning, WarningKind, MIN_SEPARATION_SIGMAS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Semantic,
}

/// A positioned error from lexing, parsing or normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn lexical(span: Span, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Lexical,
            span,
            message: message.into(),
        }
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Syntax,
            span,
            message: message.into(),
        }
    }

    pub fn semantic(span: Span, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Semantic,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Lexical => "lexical error",
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Semantic => "error",
        };
        write!(
            f,
            "line {}, column {}: {kind}: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

impl std::error::Error for Diagnostic {}
