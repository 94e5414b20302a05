//! Text grammar for polynomials.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary ("*" unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" INTEGER)?
//! atom   := NUMBER | IDENT | "(" expr ")"
//! NUMBER := INTEGER ("/" INTEGER)?
//! ```
//!
//! `d`, `l`, `m`, `n` are ∂, λ, μ, ν. Other identifiers are parameters and
//! are registered on first use. Whitespace is ignored.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{is_negative, Monomial, MultiPoly, Rational, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct SyntaxError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn err(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let start = i;
        match ch {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num: BigInt = chars[i..j].iter().collect::<String>().parse().unwrap();
                let mut value = Rational::from_integer(num);
                if j < chars.len() && chars[j] == '/' {
                    let k0 = j + 1;
                    let mut k = k0;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == k0 {
                        return Err(err(j, "expected denominator after '/'"));
                    }
                    let den: BigInt = chars[k0..k].iter().collect::<String>().parse().unwrap();
                    if den.is_zero() {
                        return Err(err(k0, "zero denominator"));
                    }
                    value /= Rational::from_integer(den);
                    j = k;
                }
                out.push((start, Tok::Num(value)));
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                out.push((start, Tok::Ident(chars[i..j].iter().collect())));
                i = j;
                continue;
            }
            other => return Err(err(start, format!("unexpected character '{other}'"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn expr(&mut self) -> Result<MultiPoly, SyntaxError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, SyntaxError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, SyntaxError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly, SyntaxError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.here();
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n.is_integer() && !n.is_negative() => {
                    self.pos += 1;
                    let e: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| err(at, "exponent too large"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(err(at, "exponent must be a nonnegative integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, SyntaxError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(MultiPoly::var(Var::named(&name)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(err(self.here(), "expected ')'")),
                }
            }
            Some(t) => Err(err(at, format!("unexpected token {t:?}"))),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

/// Parses a polynomial in the text grammar.
pub fn parse(text: &str) -> Result<MultiPoly, SyntaxError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let p = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(err(parser.here(), "trailing input"));
    }
    Ok(p)
}

fn render_monomial(m: &Monomial) -> String {
    m.vars()
        .map(|(v, e)| {
            if e == 1 {
                v.name()
            } else {
                format!("{}^{}", v.name(), e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Canonical rendering: terms by descending graded-lexicographic order.
pub fn render(p: &MultiPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms().rev().enumerate() {
        let neg = is_negative(c);
        let mag = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&render_monomial(m));
        } else {
            out.push_str(&format!("{}*{}", mag, render_monomial(m)));
        }
    }
    out
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    #[test]
    fn parse_examples() {
        let p = parse("-d - 2*l").unwrap();
        let expected = &(-MultiPoly::d()) - &MultiPoly::l().scale(&ratio(2, 1));
        assert_eq!(p, expected);
        assert_eq!(render(&p), "-d - 2*l");

        let q = parse("a*l + b - d").unwrap();
        assert_eq!(q.coefficient_of(Var::L, 1), MultiPoly::var(Var::A));
    }

    #[test]
    fn render_orders_by_degree_then_lex() {
        assert_eq!(render(&parse("b + l*a - d").unwrap()), "l*a - d + b");
        assert_eq!(render(&parse("1/2 - 3/4*d^2*l + cinv").unwrap()), "-3/4*d^2*l + cinv + 1/2");
        assert_eq!(render(&MultiPoly::zero()), "0");
    }

    #[test]
    fn whitespace_and_parens() {
        let p = parse(" ( d-b ) * ( d -b+l ) ").unwrap();
        assert_eq!(p, parse("d^2 - 2*b*d + l*d + b^2 - b*l").unwrap());
        assert_eq!(parse("-(d)^2").unwrap(), parse("-d^2").unwrap());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse("d + * l").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("d ^ l").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("(d + l").unwrap_err();
        assert_eq!(e.position, 6);
        let e = parse("1/0").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse("d $ l").is_err());
        assert!(parse("").is_err());
        assert!(parse("d l").is_err());
    }

    #[test]
    fn round_trip_simple() {
        for s in ["-d - 2*l", "l*a - d + b", "l*cinv - 7/3", "d^2*m + l*n"] {
            assert_eq!(render(&parse(s).unwrap()), s);
        }
    }
}
