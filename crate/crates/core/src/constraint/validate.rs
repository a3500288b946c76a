//! Consistency checks for families of statements that describe the alternative
//! outcomes of one categorical observation.
//!
//! Statements opt in with a trailing `group <family>[.<category>]` clause. All
//! statements sharing `<family>` are the possible outcomes; statements that also
//! share `<category>` jointly describe one outcome (for example the middle
//! category of a three-way observation, written as two one-sided statements).
//! Without a category suffix every statement is its own category.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::ConstraintStatement;
use super::binding::{LinearExpr, Reduction};
use super::normalize::{normalize, Normalized};
use crate::likelihood::QualitativeObservation;

/// Minimum threshold separation, in units of sigma, for the one-sided split of a middle category.
pub const MIN_SEPARATION_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningKind {
    ProbabilitySum,
    Separation,
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyWarning {
    pub family: String,
    pub kind: WarningKind,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FamilyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: group `{}`: {}", self.line, self.family, self.message)
    }
}

struct Member<'a> {
    stmt: &'a ConstraintStatement,
    obs: QualitativeObservation,
}

fn split_tag(tag: &str) -> (&str, Option<&str>) {
    match tag.split_once('.') {
        Some((family, category)) => (family, Some(category)),
        None => (tag, None),
    }
}

fn same_window(a: &Reduction, b: &Reduction) -> bool {
    match (a, b) {
        (Reduction::AtTime(x), Reduction::AtTime(y)) => x == y,
        (Reduction::Max(x) | Reduction::Min(x), Reduction::Max(y) | Reduction::Min(y)) => x == y,
        _ => false,
    }
}

fn is_negation(a: &LinearExpr, b: &LinearExpr) -> bool {
    let mut na = a.negated().terms;
    let mut nb = b.terms.clone();
    let key = |t: &(f64, String)| (t.1.clone(), t.0.to_bits());
    na.sort_by_key(key);
    nb.sort_by_key(key);
    na == nb
}

/// Checks every grouped family and returns diagnostics; never fails.
///
/// Statements that do not normalize to likelihood observations are skipped.
pub fn validate_category_family(stmts: &[ConstraintStatement]) -> Vec<FamilyWarning> {
    let mut families: BTreeMap<&str, BTreeMap<String, Vec<Member<'_>>>> = BTreeMap::new();
    for (i, stmt) in stmts.iter().enumerate() {
        let Some(tag) = stmt.group.as_deref() else {
            continue;
        };
        let Ok(Normalized::Likelihood(obs)) = normalize(stmt) else {
            continue;
        };
        let (family, category) = split_tag(tag);
        let category = category.map(str::to_string).unwrap_or_else(|| format!("#{i}"));
        families
            .entry(family)
            .or_default()
            .entry(category)
            .or_default()
            .push(Member { stmt, obs });
    }

    let mut warnings = Vec::new();
    for (family, categories) in &families {
        let warn = |kind, line, message: String| FamilyWarning {
            family: family.to_string(),
            kind,
            line,
            message,
        };
        let members: Vec<&Member<'_>> = categories.values().flatten().collect();
        let first_line = members[0].stmt.span.line;

        // Probabilities of all outcomes: the discrepancy bases plus the sampled branch.
        if categories.len() >= 2 {
            let totals: Vec<f64> = members.iter().map(|m| m.obs.eps_plus + m.obs.eps_minus).collect();
            let spread = totals.iter().fold(0.0f64, |acc, t| acc.max((t - totals[0]).abs()));
            if spread > 1e-9 {
                warnings.push(warn(
                    WarningKind::ProbabilitySum,
                    first_line,
                    "statements disagree on the total discrepancy rate eps+ + eps-".into(),
                ));
            } else {
                let bases: f64 = categories.values().map(|ms| ms[0].obs.eps_plus).sum();
                let implied = bases + (1.0 - totals[0]);
                if (implied - 1.0).abs() > 1e-9 {
                    warnings.push(warn(
                        WarningKind::ProbabilitySum,
                        first_line,
                        format!("implied outcome probabilities sum to {implied}, not 1"),
                    ));
                }
            }
        }

        // Middle categories split into two one-sided statements need well separated thresholds.
        for ms in categories.values() {
            for (i, a) in ms.iter().enumerate() {
                for b in &ms[i + 1..] {
                    if !is_negation(&a.obs.binding.expression, &b.obs.binding.expression) {
                        continue;
                    }
                    // a: Y < c_a, b: -Y < c_b, so -c_b < Y < c_a
                    let width = a.obs.threshold + b.obs.threshold;
                    let sigma = a.obs.sigma.max(b.obs.sigma);
                    if width < MIN_SEPARATION_SIGMAS * sigma {
                        warnings.push(warn(
                            WarningKind::Separation,
                            b.stmt.span.line,
                            format!(
                                "category bounds are {width} apart, less than {MIN_SEPARATION_SIGMAS} sigma ({})",
                                MIN_SEPARATION_SIGMAS * sigma
                            ),
                        ));
                    }
                }
            }
        }

        // Complementary outcomes: `always` must pair with `once`.
        let cats: Vec<&Vec<Member<'_>>> = categories.values().collect();
        for (i, ca) in cats.iter().enumerate() {
            for cb in &cats[i + 1..] {
                for a in ca.iter() {
                    for b in cb.iter() {
                        let (ra, rb) = (&a.obs.binding.reduction, &b.obs.binding.reduction);
                        if !is_negation(&a.obs.binding.expression, &b.obs.binding.expression)
                            || a.obs.threshold != -b.obs.threshold
                            || !same_window(ra, rb)
                        {
                            continue;
                        }
                        let clash = matches!(
                            (ra, rb),
                            (Reduction::Max(_), Reduction::Max(_)) | (Reduction::Min(_), Reduction::Min(_))
                        );
                        if clash {
                            let dual = if matches!(ra, Reduction::Max(_)) {
                                "once"
                            } else {
                                "always"
                            };
                            warnings.push(warn(
                                WarningKind::Complement,
                                b.stmt.span.line,
                                format!(
                                    "`{}` and `{}` are not complementary outcomes; the complement needs `{dual}`",
                                    a.stmt, b.stmt
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    warnings
}
