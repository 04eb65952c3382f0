//! Polynomial text grammar.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor ('*' factor)*
//! factor  := primary ('^' integer)?
//! primary := integer ('/' integer)? | ident | '(' expr ')'
//! ```
//! Whitespace is ignored and `−` (U+2212) is accepted as a minus sign.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::poly::JetPolynomial;
use crate::error::{Error, Result};
use crate::rational::Rational;

const UNBOUNDED: u32 = u32::MAX;

/// Parses `text` over the declared variables. The resulting jet order is the
/// total degree of the expanded polynomial.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<JetPolynomial> {
    let mut p = Parser {
        src: text,
        toks: tokenize(text)?,
        at: 0,
        vars,
    };
    let poly = p.expr()?;
    if let Some(t) = p.toks.get(p.at) {
        return Err(Error::Syntax {
            pos: t.pos,
            msg: format!("unexpected `{}`", t.text(p.src)),
        });
    }
    let deg = poly.degree().unwrap_or(0);
    Ok(poly.truncate(deg))
}

/// Parses `text`, declaring variables in order of first use.
pub fn parse_poly_infer(text: &str) -> Result<(JetPolynomial, Vec<String>)> {
    let mut vars: Vec<String> = Vec::new();
    for t in tokenize(text)? {
        if let Tok::Ident(name) = &t.kind {
            if !vars.contains(name) {
                vars.push(name.clone());
            }
        }
    }
    let p = parse_poly(text, &vars)?;
    Ok((p, vars))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    pos: usize,
    len: usize,
}

impl Token {
    fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.pos..self.pos + self.len]
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some((pos, c)) = it.next() {
        let single = |kind| Token {
            kind,
            pos,
            len: c.len_utf8(),
        };
        match c {
            c if c.is_whitespace() => {}
            '+' => out.push(single(Tok::Plus)),
            '-' | '\u{2212}' => out.push(single(Tok::Minus)),
            '*' => out.push(single(Tok::Star)),
            '/' => out.push(single(Tok::Slash)),
            '^' => out.push(single(Tok::Caret)),
            '(' => out.push(single(Tok::LParen)),
            ')' => out.push(single(Tok::RParen)),
            c if c.is_ascii_digit() => {
                let mut end = pos + 1;
                while let Some(&(p, d)) = it.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = p + 1;
                    it.next();
                }
                out.push(Token {
                    kind: Tok::Int(src[pos..end].parse().expect("digits")),
                    pos,
                    len: end - pos,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = pos + c.len_utf8();
                while let Some(&(p, d)) = it.peek() {
                    if !(d.is_alphanumeric() || d == '_') {
                        break;
                    }
                    end = p + d.len_utf8();
                    it.next();
                }
                out.push(Token {
                    kind: Tok::Ident(src[pos..end].to_string()),
                    pos,
                    len: end - pos,
                });
            }
            other => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    at: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.kind)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.src.len(), |t| t.pos)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<JetPolynomial> {
        let n = self.vars.len();
        let mut negate = false;
        match self.peek() {
            Some(Tok::Plus) => self.at += 1,
            Some(Tok::Minus) => {
                negate = true;
                self.at += 1
            }
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            let neg = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.at += 1;
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
        }
        debug_assert_eq!(acc.nvars(), n);
        Ok(acc)
    }

    fn term(&mut self) -> Result<JetPolynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<JetPolynomial> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.at += 1;
            match self.peek().cloned() {
                Some(Tok::Int(k)) => {
                    self.at += 1;
                    let k: u32 = k
                        .try_into()
                        .or_else(|_| self.err("exponent too large"))?;
                    if k == 0 {
                        return self.err("exponent must be at least 1");
                    }
                    return Ok(base.pow(k));
                }
                _ => return self.err("expected integer exponent"),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<JetPolynomial> {
        let n = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Int(num)) => {
                let lit_start = self.pos();
                self.at += 1;
                let mut den = BigInt::one();
                if self.peek() == Some(&Tok::Slash) {
                    self.at += 1;
                    match self.peek().cloned() {
                        Some(Tok::Int(d)) => {
                            self.at += 1;
                            den = d;
                        }
                        _ => return self.err("expected denominator"),
                    }
                }
                if den.is_zero() {
                    let end = self.pos();
                    return Err(Error::ZeroDenominator(
                        self.src[lit_start..end].trim().to_string(),
                    ));
                }
                Ok(JetPolynomial::constant(
                    n,
                    UNBOUNDED,
                    Rational::new(num, den),
                ))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or(Error::UnknownVariable(name))?;
                Ok(JetPolynomial::monomial(
                    Monomial::var(n, i),
                    Rational::one(),
                    UNBOUNDED,
                ))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(e)
            }
            Some(_) => self.err("expected a number, variable or `(`"),
            None => self.err("unexpected end of input"),
        }
    }
}
