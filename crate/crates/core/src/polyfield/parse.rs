//! Recursive-descent parser for system-definition files.
//!
//! ```text
//! # comment
//! param c = 1
//! dx = y
//! dy = z
//! dz = c^2 - y - x^2/2
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use super::field::PolyVectorField;
use super::poly::{TriPolynomial, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("exponent must be a non-negative integer literal, found `{0}`")]
    NonIntegerExponent(String),
    #[error("parameter `{0}` used before its definition")]
    ParamBeforeDefinition(String),
    #[error("division requires a non-zero numeric divisor")]
    NonNumericDivisor,
    #[error("equation `{0}` defined twice")]
    DuplicateEquation(String),
    #[error("missing equation `{0}`")]
    MissingEquation(String),
    #[error("parameter `{0}` defined twice")]
    DuplicateParam(String),
    #[error("total degree exceeds {MAX_DEGREE}")]
    DegreeTooHigh,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Assign,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Assign),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, col });
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| ParseError {
                line: line_no,
                column: col,
                kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            })?;
            out.push(Token { tok: Tok::Num(v, text), col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else {
            return Err(ParseError {
                line: line_no,
                column: col,
                kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
            });
        }
    }
    out.push(Token { tok: Tok::End, col: chars.len() + 1 });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    params: &'a BTreeMap<String, f64>,
    declared_later: &'a BTreeMap<String, usize>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn col(&self) -> usize {
        self.toks[self.pos].col
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column: self.col(), kind }
    }

    fn err_at(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column, kind }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Syntax(format!("expected {what}"))))
        }
    }

    fn check_degree(&self, p: TriPolynomial, col: usize) -> Result<TriPolynomial, ParseError> {
        if p.degree() > MAX_DEGREE {
            Err(self.err_at(col, ParseErrorKind::DegreeTooHigh))
        } else {
            Ok(p)
        }
    }

    fn expr(&mut self) -> Result<TriPolynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TriPolynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.check_degree(&acc * &rhs, col)?;
                }
                Tok::Slash => {
                    self.bump();
                    let col = self.col();
                    let rhs = self.unary()?;
                    match rhs.as_constant() {
                        Some(c) if c != 0.0 => acc = acc.scale(1.0 / c),
                        _ => return Err(self.err_at(col, ParseErrorKind::NonNumericDivisor)),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<TriPolynomial, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<TriPolynomial, ParseError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let col = self.col();
        match self.bump() {
            Tok::Num(v, text) if text.chars().all(|c| c.is_ascii_digit()) => {
                if let Some(c) = base.as_constant() {
                    return Ok(TriPolynomial::constant(c.powf(v)));
                }
                if v > MAX_DEGREE as f64 {
                    return Err(self.err_at(col, ParseErrorKind::DegreeTooHigh));
                }
                self.check_degree(base.pow(v as u32), col)
            }
            Tok::Num(_, text) | Tok::Ident(text) => {
                Err(self.err_at(col, ParseErrorKind::NonIntegerExponent(text)))
            }
            Tok::Minus => Err(self.err_at(col, ParseErrorKind::NonIntegerExponent("-".into()))),
            _ => Err(self.err_at(col, ParseErrorKind::Syntax("expected exponent".into()))),
        }
    }

    fn base(&mut self) -> Result<TriPolynomial, ParseError> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v, _) => Ok(TriPolynomial::constant(v)),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(TriPolynomial::var(0)),
                "y" => Ok(TriPolynomial::var(1)),
                "z" => Ok(TriPolynomial::var(2)),
                _ => {
                    if let Some(v) = self.params.get(&name) {
                        Ok(TriPolynomial::constant(*v))
                    } else if self.declared_later.contains_key(&name) {
                        Err(self.err_at(col, ParseErrorKind::ParamBeforeDefinition(name)))
                    } else {
                        Err(self.err_at(col, ParseErrorKind::UnknownIdentifier(name)))
                    }
                }
            },
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::End => Err(self.err_at(col, ParseErrorKind::Syntax("unexpected end of line".into()))),
            t => Err(self.err_at(col, ParseErrorKind::Syntax(format!("unexpected token {t:?}")))),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
}

/// Parses a system definition with no external parameter values.
pub fn parse_system(text: &str) -> Result<PolyVectorField, ParseError> {
    parse_system_with(text, &BTreeMap::new())
}

/// Parses a system definition; `overrides` replace the values of `param`
/// lines and may also supply parameters the file does not declare.
pub fn parse_system_with(
    text: &str,
    overrides: &BTreeMap<String, f64>,
) -> Result<PolyVectorField, ParseError> {
    // First pass: where each parameter is declared, for "used before definition".
    let mut declared: BTreeMap<String, usize> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let toks = lex(strip_comment(raw), n + 1)?;
        if let (Some(Tok::Ident(kw)), Some(Tok::Ident(name))) =
            (toks.first().map(|t| &t.tok), toks.get(1).map(|t| &t.tok))
        {
            if kw == "param" {
                if declared.contains_key(name) {
                    return Err(ParseError {
                        line: n + 1,
                        column: toks[1].col,
                        kind: ParseErrorKind::DuplicateParam(name.clone()),
                    });
                }
                declared.insert(name.clone(), n + 1);
            }
        }
    }

    let mut params: BTreeMap<String, f64> = overrides.clone();
    let mut pending: BTreeMap<String, usize> = declared
        .iter()
        .filter(|(k, _)| !overrides.contains_key(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let mut comps: [Option<TriPolynomial>; 3] = [None, None, None];

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let toks = lex(strip_comment(raw), line_no)?;
        if toks.len() == 1 {
            continue;
        }
        let mut p = Parser { toks, pos: 0, line: line_no, params: &params, declared_later: &pending };
        let head_col = p.col();
        let head = match p.bump() {
            Tok::Ident(s) => s,
            _ => {
                return Err(p.err_at(head_col, ParseErrorKind::Syntax("expected `param`, `dx`, `dy` or `dz`".into())))
            }
        };
        if head == "param" {
            let name = match p.bump() {
                Tok::Ident(s) => s,
                _ => return Err(p.err(ParseErrorKind::Syntax("expected parameter name".into()))),
            };
            p.expect(Tok::Assign, "`=`")?;
            let neg = if *p.peek() == Tok::Minus {
                p.bump();
                true
            } else {
                false
            };
            let v = match p.bump() {
                Tok::Num(v, _) => if neg { -v } else { v },
                _ => return Err(p.err(ParseErrorKind::Syntax("expected number".into()))),
            };
            p.expect(Tok::End, "end of line")?;
            pending.remove(&name);
            params.entry(name).or_insert(v);
            continue;
        }
        let k = match head.as_str() {
            "dx" => 0,
            "dy" => 1,
            "dz" => 2,
            _ => {
                return Err(p.err_at(head_col, ParseErrorKind::Syntax(format!("unexpected `{head}` at line start"))))
            }
        };
        if comps[k].is_some() {
            return Err(p.err_at(head_col, ParseErrorKind::DuplicateEquation(head)));
        }
        p.expect(Tok::Assign, "`=`")?;
        let e = p.expr()?;
        p.expect(Tok::End, "operator or end of line")?;
        comps[k] = Some(e);
    }

    let line_count = text.lines().count().max(1);
    let mut out: Vec<TriPolynomial> = Vec::with_capacity(3);
    for (k, c) in comps.into_iter().enumerate() {
        match c {
            Some(p) => out.push(p),
            None => {
                return Err(ParseError {
                    line: line_count,
                    column: 1,
                    kind: ParseErrorKind::MissingEquation(["dx", "dy", "dz"][k].into()),
                })
            }
        }
    }
    let [f1, f2, f3]: [TriPolynomial; 3] = out.try_into().expect("three components");
    Ok(PolyVectorField::new("custom", params, [f1, f2, f3]))
}
