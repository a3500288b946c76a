use super::ast::{ConstraintStatement, Enforcement, EnforcementMode, Operand, Qualifier, RelOp};
use super::binding::{LinearExpr, ReducedBinding, Reduction};
use super::lexer::Span;
use super::Diagnostic;
use crate::likelihood::{QualitativeObservation, StaticPenaltyTerm};

/// A statement after normalization to the one-sided form "reduced < threshold".
#[derive(Debug, Clone, PartialEq)]
pub enum Normalized {
    Likelihood(QualitativeObservation),
    Penalty(StaticPenaltyTerm),
}

impl Normalized {
    pub fn binding(&self) -> &ReducedBinding {
        match self {
            Self::Likelihood(o) => &o.binding,
            Self::Penalty(p) => &p.binding,
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            Self::Likelihood(o) => o.threshold,
            Self::Penalty(p) => p.threshold,
        }
    }

    /// Canonical statement that normalizes back to `self`.
    ///
    /// Exact for expressions produced by [`normalize`]; discrepancy rates
    /// round-trip bit-exactly whenever `pmax >= 0.5`.
    pub fn to_statement(&self) -> ConstraintStatement {
        let binding = self.binding();
        let c = self.threshold();
        let terms = &binding.expression.terms;
        let (lhs, op, rhs) = match terms.as_slice() {
            [(k, a)] if *k < 0.0 => (Operand::Observable(a.clone()), RelOp::Gt, Operand::Literal(-c)),
            [(_, a)] => (Operand::Observable(a.clone()), RelOp::Lt, Operand::Literal(c)),
            [(k, a), (_, b)] if *k > 0.0 => (
                Operand::Observable(a.clone()),
                RelOp::Lt,
                Operand::Observable(b.clone()),
            ),
            [(_, a), (_, b)] => (
                Operand::Observable(b.clone()),
                RelOp::Lt,
                Operand::Observable(a.clone()),
            ),
            _ => unreachable!("normalized expressions have one or two terms"),
        };
        let enforcement = match binding.reduction {
            Reduction::AtTime(t) => Enforcement {
                mode: EnforcementMode::AtTime(t),
                window: None,
            },
            Reduction::Max(w) => Enforcement {
                mode: EnforcementMode::Always,
                window: w,
            },
            Reduction::Min(w) => Enforcement {
                mode: EnforcementMode::Once,
                window: w,
            },
        };
        let qualifier = match self {
            Self::Penalty(p) => Qualifier::Weight(p.weight),
            Self::Likelihood(o) if o.eps_plus == o.eps_minus => Qualifier::Likelihood {
                confidence: 1.0 - 2.0 * o.eps_plus,
                tolerance: o.sigma,
            },
            Self::Likelihood(o) => Qualifier::LikelihoodAsym {
                pmin: o.eps_plus,
                pmax: 1.0 - o.eps_minus,
                tolerance: o.sigma,
            },
        };
        ConstraintStatement {
            lhs,
            op,
            rhs,
            enforcement,
            qualifier,
            group: None,
            span: Span::default(),
        }
    }
}

/// Converts a parsed statement into a likelihood observation or a penalty term.
///
/// `>` inequalities are negated so the observation always reads "Y < c":
/// `A > 4` becomes `-A < -4` and `A > B` becomes `B - A < 0`. `always` takes
/// the maximum of Y over its window, `once` the minimum. `confidence k` gives
/// `eps_plus = eps_minus = (1 - k) / 2`; `pmin`/`pmax` bound the report
/// probability, so `eps_plus = pmin` and `eps_minus = 1 - pmax`.
pub fn normalize(stmt: &ConstraintStatement) -> Result<Normalized, Diagnostic> {
    // e = lhs - rhs for `<`, rhs - lhs for `>`; observation is e < 0
    let (pos, neg) = if stmt.op.is_less() {
        (&stmt.lhs, &stmt.rhs)
    } else {
        (&stmt.rhs, &stmt.lhs)
    };
    let mut terms = Vec::with_capacity(2);
    let mut constant = 0.0;
    for (sign, operand) in [(1.0, pos), (-1.0, neg)] {
        match operand {
            Operand::Observable(name) => terms.push((sign, name.clone())),
            Operand::Literal(v) => constant += sign * v,
        }
    }
    if terms.is_empty() {
        return Err(Diagnostic::semantic(
            stmt.span,
            "at least one side of the inequality must be an observable",
        ));
    }
    let threshold = 0.0 - constant;
    let reduction = match stmt.enforcement.mode {
        EnforcementMode::AtTime(t) => Reduction::AtTime(t),
        EnforcementMode::Always => Reduction::Max(stmt.enforcement.window),
        EnforcementMode::Once => Reduction::Min(stmt.enforcement.window),
    };
    let binding = ReducedBinding {
        expression: LinearExpr { terms },
        reduction,
    };

    let (eps_plus, eps_minus, sigma) = match stmt.qualifier {
        Qualifier::Weight(weight) => {
            return Ok(Normalized::Penalty(StaticPenaltyTerm {
                binding,
                threshold,
                weight,
            }))
        }
        Qualifier::Likelihood { confidence, tolerance } => {
            let eps = (1.0 - confidence) / 2.0;
            (eps, eps, tolerance)
        }
        Qualifier::LikelihoodAsym { pmin, pmax, tolerance } => {
            if pmin >= pmax {
                return Err(Diagnostic::semantic(
                    stmt.span,
                    format!("pmin {pmin} must be smaller than pmax {pmax}"),
                ));
            }
            (pmin, 1.0 - pmax, tolerance)
        }
    };
    QualitativeObservation::new(binding, threshold, sigma, eps_plus, eps_minus)
        .map(Normalized::Likelihood)
        .map_err(|e| Diagnostic::semantic(stmt.span, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::parse_line;
    use super::*;

    fn obs(src: &str) -> QualitativeObservation {
        match normalize(&parse_line(src).unwrap()).unwrap() {
            Normalized::Likelihood(o) => o,
            other => panic!("expected likelihood, got {other:?}"),
        }
    }

    #[test]
    fn confidence_maps_to_symmetric_eps() {
        let o = obs("A<4 at time=1 confidence 0.98 tolerance 0.5");
        assert!((o.eps_plus - 0.01).abs() < 1e-15);
        assert_eq!(o.eps_plus, o.eps_minus);
        assert_eq!(o.sigma, 0.5);
        assert_eq!(o.threshold, 4.0);
        assert_eq!(o.binding.expression.terms, vec![(1.0, "A".to_string())]);
        assert_eq!(o.binding.reduction, Reduction::AtTime(1.0));
    }

    #[test]
    fn pmin_pmax_bound_the_report_probability() {
        let o = obs("A<4 at time=1 pmin 0.01 pmax 0.98 tolerance 0.5");
        assert_eq!(o.eps_plus, 0.01);
        assert!((o.eps_minus - 0.02).abs() < 1e-15);
        let o = obs("a<85 at time=0 pmin 0.03 pmax 0.94 tolerance 5");
        assert_eq!(o.eps_plus, 0.03);
        assert!((o.eps_minus - 0.06).abs() < 1e-15);
        let bad = parse_line("A<4 at time=1 pmin 0.5 pmax 0.4 tolerance 1").unwrap();
        assert!(normalize(&bad).is_err());
    }

    #[test]
    fn greater_than_is_negated() {
        let o = obs("A>4 always confidence 0.98 tolerance 0.5");
        assert_eq!(o.binding.expression.terms, vec![(-1.0, "A".to_string())]);
        assert_eq!(o.threshold, -4.0);
        assert_eq!(o.binding.reduction, Reduction::Max(None));

        let o = obs("A>B at time=5 confidence 0.98 tolerance 0.5");
        assert_eq!(
            o.binding.expression.terms,
            vec![(1.0, "B".to_string()), (-1.0, "A".to_string())]
        );
        assert_eq!(o.threshold, 0.0);
        assert_eq!(o.sigma, 0.5);

        let o = obs("4>A once between time=1,time=2 confidence 0.9 tolerance 1");
        assert_eq!(o.binding.expression.terms, vec![(1.0, "A".to_string())]);
        assert_eq!(o.threshold, 4.0);
        assert_eq!(o.binding.reduction, Reduction::Min(Some((1.0, 2.0))));
    }

    #[test]
    fn weight_becomes_penalty() {
        match normalize(&parse_line("A<4 at time=1 weight 2").unwrap()).unwrap() {
            Normalized::Penalty(p) => {
                assert_eq!(p.weight, 2.0);
                assert_eq!(p.threshold, 4.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_statement_round_trips() {
        for src in [
            "A>4 always confidence 0.98 tolerance 0.5",
            "A>B at time=5 confidence 0.98 tolerance 0.5",
            "A<B once between time=1,time=3 pmin 0.03 pmax 0.94 tolerance 5",
            "4<A at time=2 weight 3",
        ] {
            let n = normalize(&parse_line(src).unwrap()).unwrap();
            let again = normalize(&n.to_statement()).unwrap();
            assert_eq!(n, again, "{src}");
        }
    }
}
