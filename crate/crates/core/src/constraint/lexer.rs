use std::fmt;

use super::Diagnostic;

/// Position of a token in the source, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    At,
    Time,
    Always,
    Once,
    Between,
    Weight,
    Confidence,
    Tolerance,
    Pmin,
    Pmax,
    Group,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "at" => Self::At,
            "time" => Self::Time,
            "always" => Self::Always,
            "once" => Self::Once,
            "between" => Self::Between,
            "weight" => Self::Weight,
            "confidence" => Self::Confidence,
            "tolerance" => Self::Tolerance,
            "pmin" => Self::Pmin,
            "pmax" => Self::Pmax,
            "group" => Self::Group,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::At => "at",
            Self::Time => "time",
            Self::Always => "always",
            Self::Once => "once",
            Self::Between => "between",
            Self::Weight => "weight",
            Self::Confidence => "confidence",
            Self::Tolerance => "tolerance",
            Self::Pmin => "pmin",
            Self::Pmax => "pmax",
            Self::Group => "group",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Keyword(Keyword),
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ident(s) => write!(f, "identifier `{s}`"),
            Self::Number(n) => write!(f, "number `{n}`"),
            Self::Keyword(k) => write!(f, "`{}`", k.as_str()),
            Self::Lt => f.write_str("`<`"),
            Self::Le => f.write_str("`<=`"),
            Self::Gt => f.write_str("`>`"),
            Self::Ge => f.write_str("`>=`"),
            Self::Eq => f.write_str("`=`"),
            Self::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits constraint source text into tokens. `#` starts a comment that runs
/// to the end of the line; line breaks only show up through token spans.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    for (i, line) in source.lines().enumerate() {
        tokenize_line(line, i + 1, &mut tokens)?;
    }
    Ok(tokens)
}

pub(crate) fn tokenize_line(line: &str, line_no: usize, out: &mut Vec<Token>) -> Result<(), Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let span = |end: usize| Span {
            line: line_no,
            column: start + 1,
            len: end - start,
        };
        let kind = match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '<' | '>' => {
                let next = chars.get(i + 1).copied();
                if next == Some('<') || next == Some('>') {
                    return Err(Diagnostic::lexical(
                        span(i + 2),
                        format!("malformed operator `{c}{}`", next.unwrap()),
                    ));
                }
                let with_eq = next == Some('=');
                i += 1 + usize::from(with_eq);
                match (c, with_eq) {
                    ('<', false) => TokenKind::Lt,
                    ('<', true) => TokenKind::Le,
                    ('>', false) => TokenKind::Gt,
                    _ => TokenKind::Ge,
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    return Err(Diagnostic::lexical(span(i + 2), "malformed operator `==`"));
                }
                i += 1;
                TokenKind::Eq
            }
            ',' => {
                i += 1;
                TokenKind::Comma
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match Keyword::from_word(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                }
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                i = scan_number(&chars, i);
                let text: String = chars[start..i].iter().collect();
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => TokenKind::Number(v),
                    _ => {
                        return Err(Diagnostic::lexical(
                            span(i.max(start + 1)),
                            format!("invalid number `{text}`"),
                        ))
                    }
                }
            }
            other => {
                return Err(Diagnostic::lexical(
                    span(i + 1),
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push(Token { kind, span: span(i) });
    }
    Ok(())
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    let digits = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    if chars[i] == '-' || chars[i] == '+' {
        i += 1;
    }
    digits(&mut i);
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        digits(&mut i);
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let save = i;
        i += 1;
        if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
            i += 1;
        }
        let before = i;
        digits(&mut i);
        if i == before {
            i = save;
        }
    }
    i
}
