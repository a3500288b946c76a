//! Recursive-descent parser for constraint statements.
//!
//! ```text
//! statement   := inequality enforcement [qualifier] ['group' IDENT]
//! inequality  := operand relop operand
//! operand     := IDENT | NUMBER
//! relop       := '<' | '<=' | '>' | '>='
//! enforcement := 'at' 'time' '=' NUMBER
//!              | 'always' ['between' timepair]
//!              | 'once' ['between' timepair]
//!              | 'between' timepair
//! timepair    := 'time' '=' NUMBER ',' 'time' '=' NUMBER
//! qualifier   := 'weight' NUMBER
//!              | 'confidence' NUMBER 'tolerance' NUMBER
//!              | 'pmin' NUMBER 'pmax' NUMBER 'tolerance' NUMBER
//! ```
//!
//! A bare `between` window means `always between`; a missing qualifier means `weight 1`.

use super::ast::{ConstraintStatement, Enforcement, EnforcementMode, Operand, Qualifier, RelOp};
use super::lexer::{tokenize_line, Keyword, Span, Token, TokenKind};
use super::Diagnostic;

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    end_span: Span,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => Diagnostic::syntax(t.span, format!("expected {expected}, found {}", t.kind)),
            None => Diagnostic::syntax(self.end_span, format!("expected {expected}, found end of statement")),
        }
    }

    fn keyword(&mut self, kw: Keyword) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Keyword(k),
                ..
            }) if *k == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{}`", kw.as_str()))),
        }
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        self.keyword(kw).is_ok()
    }

    fn number(&mut self) -> Result<(f64, Span), Diagnostic> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(v),
                span,
            }) => {
                self.pos += 1;
                Ok((*v, *span))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn punct(&mut self, kind: TokenKind) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&kind.to_string())),
        }
    }

    fn time_assignment(&mut self) -> Result<(f64, Span), Diagnostic> {
        self.keyword(Keyword::Time)?;
        self.punct(TokenKind::Eq)?;
        self.number()
    }
}

/// Parses the tokens of exactly one statement.
pub fn parse_statement(tokens: &[Token]) -> Result<ConstraintStatement, Diagnostic> {
    let first = tokens
        .first()
        .ok_or_else(|| Diagnostic::syntax(Span::default(), "empty statement"))?;
    let last = tokens.last().unwrap().span;
    let mut cur = Cursor {
        tokens,
        pos: 0,
        end_span: Span {
            line: last.line,
            column: last.column + last.len,
            len: 0,
        },
    };

    let lhs = operand(&mut cur)?;
    let op = match cur.next().map(|t| &t.kind) {
        Some(TokenKind::Lt) => RelOp::Lt,
        Some(TokenKind::Le) => RelOp::Le,
        Some(TokenKind::Gt) => RelOp::Gt,
        Some(TokenKind::Ge) => RelOp::Ge,
        _ => {
            cur.pos -= 1;
            return Err(cur.unexpected("a comparison operator"));
        }
    };
    let rhs = operand(&mut cur)?;
    if lhs.observable().is_none() && rhs.observable().is_none() {
        return Err(Diagnostic::semantic(
            first.span,
            "at least one side of the inequality must be an observable",
        ));
    }

    let enforcement = enforcement(&mut cur)?;
    let qualifier = qualifier(&mut cur)?;

    let group = if cur.eat_keyword(Keyword::Group) {
        match cur.next() {
            Some(Token {
                kind: TokenKind::Ident(name),
                ..
            }) => Some(name.clone()),
            _ => {
                cur.pos -= 1;
                return Err(cur.unexpected("a group name"));
            }
        }
    } else {
        None
    };

    if cur.peek().is_some() {
        return Err(cur.unexpected("end of statement"));
    }

    Ok(ConstraintStatement {
        lhs,
        op,
        rhs,
        enforcement,
        qualifier,
        group,
        span: Span {
            line: first.span.line,
            column: first.span.column,
            len: cur.end_span.column - first.span.column,
        },
    })
}

fn operand(cur: &mut Cursor<'_>) -> Result<Operand, Diagnostic> {
    match cur.peek().map(|t| &t.kind) {
        Some(TokenKind::Ident(name)) => {
            cur.pos += 1;
            Ok(Operand::Observable(name.clone()))
        }
        Some(TokenKind::Number(v)) => {
            cur.pos += 1;
            Ok(Operand::Literal(*v))
        }
        _ => Err(cur.unexpected("an observable name or a number")),
    }
}

fn non_negative_time(value: f64, span: Span) -> Result<f64, Diagnostic> {
    if value < 0.0 {
        return Err(Diagnostic::semantic(span, format!("time must be >= 0, got {value}")));
    }
    Ok(value)
}

fn window(cur: &mut Cursor<'_>) -> Result<Option<(f64, f64)>, Diagnostic> {
    if !cur.eat_keyword(Keyword::Between) {
        return Ok(None);
    }
    let (a, sa) = cur.time_assignment()?;
    cur.punct(TokenKind::Comma)?;
    let (b, sb) = cur.time_assignment()?;
    let a = non_negative_time(a, sa)?;
    non_negative_time(b, sb)?;
    if !(a < b) {
        return Err(Diagnostic::semantic(
            sb,
            format!("window start {a} must precede window end {b}"),
        ));
    }
    Ok(Some((a, b)))
}

fn enforcement(cur: &mut Cursor<'_>) -> Result<Enforcement, Diagnostic> {
    let kw = match cur.peek().map(|t| &t.kind) {
        Some(TokenKind::Keyword(k)) => *k,
        _ => return Err(cur.unexpected("`at`, `always`, `once` or `between`")),
    };
    match kw {
        Keyword::At => {
            cur.pos += 1;
            let (t, span) = cur.time_assignment()?;
            Ok(Enforcement {
                mode: EnforcementMode::AtTime(non_negative_time(t, span)?),
                window: None,
            })
        }
        Keyword::Always | Keyword::Once => {
            cur.pos += 1;
            let mode = if kw == Keyword::Always {
                EnforcementMode::Always
            } else {
                EnforcementMode::Once
            };
            Ok(Enforcement {
                mode,
                window: window(cur)?,
            })
        }
        Keyword::Between => Ok(Enforcement {
            mode: EnforcementMode::Always,
            window: window(cur)?,
        }),
        _ => Err(cur.unexpected("`at`, `always`, `once` or `between`")),
    }
}

/// A statement without a qualifier is a static-penalty term of weight 1.
fn qualifier(cur: &mut Cursor<'_>) -> Result<Qualifier, Diagnostic> {
    let kw = match cur.peek().map(|t| &t.kind) {
        None | Some(TokenKind::Keyword(Keyword::Group)) => return Ok(Qualifier::Weight(1.0)),
        Some(TokenKind::Keyword(k)) => *k,
        _ => return Err(cur.unexpected("`weight`, `confidence` or `pmin`")),
    };
    cur.pos += 1;
    let check = |ok: bool, span: Span, what: &str, v: f64| {
        if ok {
            Ok(v)
        } else {
            Err(Diagnostic::semantic(span, format!("{what} out of range: {v}")))
        }
    };
    match kw {
        Keyword::Weight => {
            let (w, s) = cur.number()?;
            Ok(Qualifier::Weight(check(w >= 0.0, s, "weight", w)?))
        }
        Keyword::Confidence => {
            let (c, sc) = cur.number()?;
            cur.keyword(Keyword::Tolerance)?;
            let (t, st) = cur.number()?;
            Ok(Qualifier::Likelihood {
                confidence: check(c > 0.0 && c <= 1.0, sc, "confidence", c)?,
                tolerance: check(t >= 0.0, st, "tolerance", t)?,
            })
        }
        Keyword::Pmin => {
            let (lo, slo) = cur.number()?;
            cur.keyword(Keyword::Pmax)?;
            let (hi, shi) = cur.number()?;
            cur.keyword(Keyword::Tolerance)?;
            let (t, st) = cur.number()?;
            Ok(Qualifier::LikelihoodAsym {
                pmin: check((0.0..1.0).contains(&lo), slo, "pmin", lo)?,
                pmax: check(hi > 0.0 && hi <= 1.0, shi, "pmax", hi)?,
                tolerance: check(t >= 0.0, st, "tolerance", t)?,
            })
        }
        _ => {
            cur.pos -= 1;
            Err(cur.unexpected("`weight`, `confidence` or `pmin`"))
        }
    }
}

/// Parses a whole constraint file, stopping at the first error.
pub fn parse_constraints(source: &str) -> Result<Vec<ConstraintStatement>, Diagnostic> {
    let (stmts, mut errors) = parse_constraints_all(source);
    if errors.is_empty() {
        Ok(stmts)
    } else {
        Err(errors.swap_remove(0))
    }
}

/// Parses every line, collecting all statements and all diagnostics.
pub fn parse_constraints_all(source: &str) -> (Vec<ConstraintStatement>, Vec<Diagnostic>) {
    let mut stmts = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let mut tokens = Vec::new();
        if let Err(d) = tokenize_line(line, i + 1, &mut tokens) {
            errors.push(d);
            continue;
        }
        if tokens.is_empty() {
            continue;
        }
        match parse_statement(&tokens) {
            Ok(s) => stmts.push(s),
            Err(d) => errors.push(d),
        }
    }
    (stmts, errors)
}

/// Parses a single statement from text.
pub fn parse_line(text: &str) -> Result<ConstraintStatement, Diagnostic> {
    let mut stmts = parse_constraints(text)?;
    match stmts.len() {
        1 => Ok(stmts.remove(0)),
        0 => Err(Diagnostic::syntax(Span::default(), "no statement found")),
        n => Err(Diagnostic::syntax(
            Span::default(),
            format!("expected one statement, found {n}"),
        )),
    }
}
