//! Text syntax for polynomials: `+ - * / ^`, parentheses, rational
//! constants and implicit multiplication (`2t^2`, `3(t+1)`).

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::RationalPoly;
use crate::arith::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Var,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str, var: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push(Token::Num(digits.parse().expect("digit run")));
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                if chars.get(i + 1) == Some(&'*') {
                    out.push(Token::Caret);
                    i += 2;
                } else {
                    out.push(Token::Star);
                    i += 1;
                }
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                if name != var {
                    return Err(Error::Parse(format!("unknown variable {name:?}; expected {var:?}")));
                }
                out.push(Token::Var);
            }
            c => return Err(Error::Parse(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<RationalPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(Error::Parse("division only by non-zero constants".into()));
                    }
                    acc = acc.scale(&d.leading().recip());
                }
                Some(Token::Var) | Some(Token::LParen) => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalPoly> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(n)) => {
                    let k = n
                        .to_u32()
                        .filter(|&k| k <= 1000)
                        .ok_or_else(|| Error::Parse(format!("exponent {n} too large")))?;
                    Ok(base.pow(k))
                }
                _ => Err(Error::Parse("exponent must be a non-negative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RationalPoly> {
        match self.next() {
            Some(Token::Num(n)) => Ok(RationalPoly::constant(Rational::from_integer(n))),
            Some(Token::Var) => Ok(RationalPoly::t()),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

/// Parses a polynomial in the variable `t`.
pub fn parse_poly(s: &str) -> Result<RationalPoly> {
    parse_poly_in(s, "t")
}

/// Parses a polynomial in the named variable.
pub fn parse_poly_in(s: &str, var: &str) -> Result<RationalPoly> {
    let tokens = tokenize(s, var)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut p = Parser { tokens, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(out)
}

/// Parses a rational constant expression such as `-3/4` or `2^7`.
pub fn parse_constant(s: &str) -> Result<Rational> {
    let p = parse_poly(s)?;
    if !p.is_constant() {
        return Err(Error::Parse(format!("expected a constant, got {s:?}")));
    }
    Ok(if p.is_zero() { Rational::zero() } else { p.leading() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_and_expanded_forms_agree() {
        let a = parse_poly("(2*t^2-1)^2").unwrap();
        let b = parse_poly("4*t^4-4*t^2+1").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_poly("(2t^2-1)^2").unwrap(), b);
        assert_eq!(parse_poly("(2t^2+3)^2").unwrap(), RationalPoly::from_ints(&[9, 0, 12, 0, 4]));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse_poly("-t^2").unwrap(), RationalPoly::from_ints(&[0, 0, -1]));
        assert_eq!(parse_poly("-1-t^2").unwrap(), RationalPoly::from_ints(&[-1, 0, -1]));
    }

    #[test]
    fn rational_coefficients() {
        let p = parse_poly("t^2 - 1/2").unwrap();
        assert_eq!(p.coeff(0), Rational::new((-1).into(), 2.into()));
        assert_eq!(parse_poly("1/2*t").unwrap(), parse_poly("t/2").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("t^").is_err());
        assert!(parse_poly("x+1").is_err());
        assert!(parse_poly("(t+1").is_err());
        assert!(parse_poly("t/(t+1)").is_err());
        assert!(parse_poly("").is_err());
    }
}
