//! Transfer-function expression parsing and system-definition files.
//!
//! Grammar (standard precedence, left associative):
//!   expr   := term (('+' | '-') term)*
//!   term   := factor (('*' | '/') factor)*
//!   factor := '-'* power
//!   power  := atom ('^' unsigned-integer)?
//!   atom   := number | 's' | '(' expr ')'
//!
//! Power binds tighter than unary minus, so `-s^2` is `-(s^2)`. Every
//! closed expression is a rational function in `s`; anything else (such
//! as `s` in an exponent) is rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratpoly::{Polynomial, RationalFunction, RationalMatrix};

/// One matrix entry: either an expression string or explicit
/// ascending-power coefficient lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemEntry {
    Expr(String),
    ExprObj { expr: String },
    Coeffs { num: Vec<f64>, den: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Siso,
    Mimo,
}

/// JSON system-definition file. `parameters` are substituted textually
/// into expression entries before parsing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub name: String,
    pub kind: SystemKind,
    pub entries: Vec<Vec<SystemEntry>>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system file serialization")
    }
}

/// Parse a transfer-function expression into a canonical rational
/// function.
pub fn parse_expression(src: &str) -> Result<RationalFunction> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let rf = p.expr()?;
    match p.peek() {
        Token::End { .. } => Ok(rf),
        t => Err(Error::Syntax {
            offset: t.offset(),
            msg: format!("unexpected trailing input `{}`", t.describe()),
        }),
    }
}

/// Parse a full system file into a rational matrix, applying the
/// parameter map textually first.
pub fn parse_system(file: &SystemFile) -> Result<RationalMatrix> {
    let n_rows = file.entries.len();
    if n_rows == 0 {
        return Err(Error::Shape {
            msg: "system has no entries".into(),
        });
    }
    let n_cols = file.entries[0].len();
    if file.entries.iter().any(|r| r.len() != n_cols) {
        return Err(Error::Shape {
            msg: "ragged entry matrix".into(),
        });
    }
    match file.kind {
        SystemKind::Siso if n_rows != 1 || n_cols != 1 => {
            return Err(Error::Shape {
                msg: format!("siso system must be 1x1, got {n_rows}x{n_cols}"),
            });
        }
        SystemKind::Mimo if n_rows != n_cols => {
            return Err(Error::Shape {
                msg: format!("mimo system must be square, got {n_rows}x{n_cols}"),
            });
        }
        _ => {}
    }

    let mut rows = Vec::with_capacity(n_rows);
    for (i, row) in file.entries.iter().enumerate() {
        let mut out = Vec::with_capacity(n_cols);
        for (j, entry) in row.iter().enumerate() {
            let rf = parse_entry(entry, &file.parameters).map_err(|e| e.with_entry(i, j))?;
            out.push(rf);
        }
        rows.push(out);
    }
    RationalMatrix::new(rows)
}

fn parse_entry(entry: &SystemEntry, params: &BTreeMap<String, f64>) -> Result<RationalFunction> {
    match entry {
        SystemEntry::Coeffs { num, den } => {
            if num.iter().chain(den).any(|c| !c.is_finite()) {
                return Err(Error::Invalid {
                    msg: "coefficients must be finite".into(),
                });
            }
            RationalFunction::new(Polynomial::new(num.clone()), Polynomial::new(den.clone()))
        }
        SystemEntry::Expr(src) | SystemEntry::ExprObj { expr: src } => {
            let substituted = substitute_parameters(src, params)?;
            parse_expression(&substituted)
        }
    }
}

/// Textual parameter substitution: replace whole-word identifiers with
/// their parenthesized values. Longest names first so `Td` is never
/// clobbered by `T`.
fn substitute_parameters(src: &str, params: &BTreeMap<String, f64>) -> Result<String> {
    let mut names: Vec<&String> = params.keys().collect();
    names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    let mut out = String::with_capacity(src.len());
    let bytes = src.as_bytes();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            let word = &src[start..i];
            if word == "s" {
                out.push('s');
                continue 'outer;
            }
            for name in &names {
                if word == name.as_str() {
                    out.push_str(&format!("({:?})", params[name.as_str()]));
                    continue 'outer;
                }
            }
            return Err(Error::UnknownParameter { name: word.into() });
        }
        out.push(ch);
        i += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number { offset: usize, value: f64 },
    Symbol { offset: usize },
    Plus { offset: usize },
    Minus { offset: usize },
    Star { offset: usize },
    Slash { offset: usize },
    Caret { offset: usize },
    LParen { offset: usize },
    RParen { offset: usize },
    End { offset: usize },
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::Number { offset, .. }
            | Token::Symbol { offset }
            | Token::Plus { offset }
            | Token::Minus { offset }
            | Token::Star { offset }
            | Token::Slash { offset }
            | Token::Caret { offset }
            | Token::LParen { offset }
            | Token::RParen { offset }
            | Token::End { offset } => *offset,
        }
    }

    fn describe(&self) -> String {
        match self {
            Token::Number { value, .. } => format!("{value}"),
            Token::Symbol { .. } => "s".into(),
            Token::Plus { .. } => "+".into(),
            Token::Minus { .. } => "-".into(),
            Token::Star { .. } => "*".into(),
            Token::Slash { .. } => "/".into(),
            Token::Caret { .. } => "^".into(),
            Token::LParen { .. } => "(".into(),
            Token::RParen { .. } => ")".into(),
            Token::End { .. } => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        match ch {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus { offset: i });
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus { offset: i });
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star { offset: i });
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash { offset: i });
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret { offset: i });
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen { offset: i });
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen { offset: i });
                i += 1;
            }
            's' => {
                // reject multi-character identifiers here; parameter
                // substitution has already run
                if i + 1 < bytes.len()
                    && ((bytes[i + 1] as char).is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    return Err(Error::Syntax {
                        offset: i,
                        msg: "unknown identifier (only `s` is a symbol)".into(),
                    });
                }
                tokens.push(Token::Symbol { offset: i });
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                tokens.push(Token::Number {
                    offset: start,
                    value,
                });
            }
            other => {
                return Err(Error::Syntax {
                    offset: i,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    tokens.push(Token::End { offset: src.len() });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Token::Plus { .. } => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Token::Minus { .. } => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Token::Star { .. } => {
                    self.bump();
                    acc = acc.mul(&self.factor()?)?;
                }
                Token::Slash { .. } => {
                    self.bump();
                    acc = acc.div(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalFunction> {
        let mut negate = false;
        while matches!(self.peek(), Token::Minus { .. }) {
            self.bump();
            negate = !negate;
        }
        let v = self.power()?;
        Ok(if negate { v.neg() } else { v })
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        if matches!(self.peek(), Token::Caret { .. }) {
            let caret = self.bump();
            match self.bump() {
                Token::Number { offset, value } => {
                    if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                        return Err(Error::NonRational {
                            offset,
                            msg: format!("exponent must be a nonnegative integer, got {value}"),
                        });
                    }
                    base.powi(value as u32)
                }
                Token::Symbol { offset } => Err(Error::NonRational {
                    offset,
                    msg: "`s` in an exponent is not rational".into(),
                }),
                t => Err(Error::Syntax {
                    offset: t.offset().min(caret.offset().max(t.offset())),
                    msg: format!("expected integer exponent, found `{}`", t.describe()),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        match self.bump() {
            Token::Number { value, .. } => Ok(RationalFunction::constant(value)),
            Token::Symbol { .. } => Ok(RationalFunction::s()),
            Token::LParen { offset } => {
                let inner = self.expr()?;
                let _ = offset;
                match self.bump() {
                    Token::RParen { .. } => Ok(inner),
                    t => Err(Error::Syntax {
                        offset: t.offset(),
                        msg: "unclosed parenthesis".into(),
                    }),
                }
            }
            t => Err(Error::Syntax {
                offset: t.offset(),
                msg: format!("expected number, `s`, or `(`, found `{}`", t.describe()),
            }),
        }
    }
}
