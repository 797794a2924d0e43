//! Text form of polynomials: a small recursive-descent parser and the
//! canonical printer.
//!
//! Grammar (implicit multiplication is not allowed):
//!
//! ```text
//! list   := expr (',' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' INTEGER)?
//! atom   := INTEGER | IDENT | '(' expr ')'
//! ```
//!
//! Division is only allowed by nonzero constants that are units of the
//! coefficient ring, so `1/3*Y1` is fine over `Q` or `Z_(5)` but not over `Z`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::ring::{CoefficientRing, Monomial, Scalar, SparsePoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("syntax error: expected {expected}, found `{found}`")]
    UnexpectedToken {
        expected: &'static str,
        found: String,
    },
    #[error("syntax error: unexpected end of input, expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error(
        "`{0}` is not polynomial: formal power series must be truncated to polynomials \
         before input (monomials of degree above the jet level never contribute to it)"
    )]
    NotPolynomial(String),
    #[error("exponent must be a nonnegative integer no larger than {max}")]
    BadExponent { max: u32 },
    #[error("division is only allowed by a unit constant of {0}")]
    BadDivision(CoefficientRing),
    #[error("coefficient {value} is not an element of {ring}")]
    NotInRing {
        value: String,
        ring: CoefficientRing,
    },
}

const MAX_EXPONENT: u32 = 4096;

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
    Comma,
    Ellipsis,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => v.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Ellipsis => "...".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((col, Tok::Int(digits.parse().expect("digits"))));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        if c == '.' && chars.get(i + 1) == Some(&'.') && chars.get(i + 2) == Some(&'.') {
            out.push((col, Tok::Ellipsis));
            i += 3;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            other => {
                return Err(ParseError {
                    column: col,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        };
        out.push((col, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_column: usize,
    vars: &'a [String],
    ring: CoefficientRing,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(c, _)| *c)
            .unwrap_or(self.end_column)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            column: self.column(),
            kind,
        }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(Tok::Ellipsis) => self.err(ParseErrorKind::NotPolynomial("...".into())),
            Some(t) => self.err(ParseErrorKind::UnexpectedToken {
                expected,
                found: t.describe(),
            }),
            None => self.err(ParseErrorKind::UnexpectedEnd(expected)),
        }
    }

    fn list(&mut self) -> Result<Vec<SparsePoly>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<SparsePoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add_unchecked(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.add_unchecked(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SparsePoly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul_unchecked(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    let col = self.column();
                    self.pos += 1;
                    let d = self.unary()?;
                    let bad = ParseError {
                        column: col,
                        kind: ParseErrorKind::BadDivision(self.ring),
                    };
                    if d.total_degree().unwrap_or(1) != 0 {
                        return Err(bad);
                    }
                    let inv = self.ring.inv(&d.constant_term()).ok_or(bad)?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SparsePoly, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SparsePoly, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        match self.peek().cloned() {
            Some(Tok::Int(e)) => {
                let e: u32 = e
                    .try_into()
                    .ok()
                    .filter(|e| *e <= MAX_EXPONENT)
                    .ok_or_else(|| self.err(ParseErrorKind::BadExponent { max: MAX_EXPONENT }))?;
                self.pos += 1;
                Ok(base.pow(e))
            }
            Some(Tok::Minus) => Err(self.err(ParseErrorKind::BadExponent { max: MAX_EXPONENT })),
            _ => Err(self.unexpected("an integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<SparsePoly, ParseError> {
        let n = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                let c = self
                    .ring
                    .normalize(&BigRational::from_integer(v.clone()))
                    .map_err(|_| {
                        self.err(ParseErrorKind::NotInRing {
                            value: v.to_string(),
                            ring: self.ring,
                        })
                    })?;
                self.pos += 1;
                Ok(SparsePoly::constant(self.ring, n, c))
            }
            Some(Tok::Ident(name)) => {
                if self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LParen) {
                    return Err(self.err(ParseErrorKind::NotPolynomial(format!("{name}(...)"))));
                }
                let idx = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| self.err(ParseErrorKind::UnknownVariable(name.clone())))?;
                self.pos += 1;
                Ok(SparsePoly::variable(self.ring, n, idx))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.unexpected("a number, variable or `(`")),
        }
    }
}

fn run<T>(
    src: &str,
    vars: &[String],
    ring: CoefficientRing,
    f: impl FnOnce(&mut Parser<'_>) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_column: src.chars().count() + 1,
        vars,
        ring,
    };
    let out = f(&mut p)?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(out)
}

/// Parses one polynomial in the named variables over `ring`.
pub fn parse_polynomial(
    src: &str,
    vars: &[String],
    ring: CoefficientRing,
) -> Result<SparsePoly, ParseError> {
    run(src, vars, ring, |p| p.expr())
}

/// Parses a comma-separated list of polynomials.
pub fn parse_polynomial_list(
    src: &str,
    vars: &[String],
    ring: CoefficientRing,
) -> Result<Vec<SparsePoly>, ParseError> {
    run(src, vars, ring, |p| p.list())
}

fn format_monomial(m: &Monomial, vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        let name = vars
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("x{}", i + 1));
        match e {
            0 => {}
            1 => parts.push(name),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

/// Canonical text form: terms in descending graded-lex order, e.g.
/// `Y1*Y2 - Y3^2`. Parsing the output gives back the same polynomial.
pub fn format_polynomial(p: &SparsePoly, vars: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        let abs: Scalar = c.abs();
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mono = format_monomial(m, vars);
        if mono.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{abs}*{mono}"));
        }
    }
    out
}

/// Variable names `prefix1, ..., prefixN`.
pub fn numbered_vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn y(n: usize) -> Vec<String> {
        numbered_vars("Y", n)
    }

    fn z() -> CoefficientRing {
        CoefficientRing::Integers
    }

    #[test]
    fn parses_the_a1_relation() {
        let p = parse_polynomial("Y1*Y2 - Y3^2", &y(3), z()).unwrap();
        let expected = SparsePoly::from_terms(
            z(),
            3,
            [
                (vec![1, 1, 0], BigRational::one()),
                (vec![0, 0, 2], -BigRational::one()),
            ],
        )
        .unwrap();
        assert_eq!(p, expected);
        assert_eq!(format_polynomial(&p, &y(3)), "Y1*Y2 - Y3^2");
    }

    #[test]
    fn parses_the_pinch_point() {
        let p = parse_polynomial("Y1^2 - Y2^2*Y3", &y(3), z()).unwrap();
        assert_eq!(format_polynomial(&p, &y(3)), "-Y2^2*Y3 + Y1^2");
        assert_eq!(p.total_degree(), Some(3));
    }

    #[test]
    fn trailing_operator_reports_column() {
        let e = parse_polynomial("Y1 + ", &y(1), z()).unwrap_err();
        assert_eq!(e.column, 6);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd(_)));
    }

    #[test]
    fn unknown_variable() {
        let e = parse_polynomial("Y1 + W", &y(1), z()).unwrap_err();
        assert_eq!(e.column, 6);
        assert_eq!(e.kind, ParseErrorKind::UnknownVariable("W".into()));
    }

    #[test]
    fn implicit_multiplication_is_rejected() {
        let e = parse_polynomial("2Y1", &y(1), z()).unwrap_err();
        assert_eq!(e.column, 2);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedToken { .. }));
    }

    #[test]
    fn series_input_is_rejected() {
        let e = parse_polynomial("Y1 - exp(Y2)", &y(2), z()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NotPolynomial(_)));
        assert!(e.to_string().contains("truncated"));
        let e = parse_polynomial("Y1 + Y2^2 + ...", &y(2), z()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NotPolynomial(_)));
    }

    #[test]
    fn division_by_units_only() {
        let z5 = CoefficientRing::localized(5).unwrap();
        let p = parse_polynomial("1/3*Y1", &y(1), z5).unwrap();
        assert_eq!(format_polynomial(&p, &y(1)), "1/3*Y1");
        assert!(parse_polynomial("Y1/5", &y(1), z5).is_err());
        assert!(parse_polynomial("Y1/2", &y(1), z()).is_err());
        assert!(parse_polynomial("Y1/Y1", &y(1), CoefficientRing::Rationals).is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let p = parse_polynomial("-Y1^2", &y(1), z()).unwrap();
        assert_eq!(format_polynomial(&p, &y(1)), "-Y1^2");
        let q = parse_polynomial("(-Y1)^2", &y(1), z()).unwrap();
        assert_eq!(format_polynomial(&q, &y(1)), "Y1^2");
    }

    #[test]
    fn prime_field_coefficients_are_canonical() {
        let f5 = CoefficientRing::prime_field(5).unwrap();
        let p = parse_polynomial("Y1*Y2 - Y3^2 - 5*Y1^3", &y(3), f5).unwrap();
        assert_eq!(format_polynomial(&p, &y(3)), "Y1*Y2 + 4*Y3^2");
    }

    #[test]
    fn lists() {
        let t = vec!["t".to_string()];
        let l = parse_polynomial_list("0, t^2, (t + t^3)", &t, z()).unwrap();
        assert_eq!(l.len(), 3);
        assert!(l[0].is_zero());
    }

    proptest! {
        #[test]
        fn print_parse_fixpoint(
            terms in prop::collection::vec((prop::collection::vec(0u32..4, 3), -9i64..10, 1i64..5), 0..6),
            ring_ix in 0usize..3,
        ) {
            let ring = [
                CoefficientRing::Rationals,
                CoefficientRing::Integers,
                CoefficientRing::prime_field(7).unwrap(),
            ][ring_ix];
            let raw = terms.into_iter().filter_map(|(e, n, d)| {
                ring.normalize(&BigRational::new(n.into(), d.into())).ok().map(|c| (e, c))
            });
            let p = SparsePoly::from_terms(ring, 3, raw).unwrap();
            let text = format_polynomial(&p, &y(3));
            let back = parse_polynomial(&text, &y(3), ring).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(format_polynomial(&back, &y(3)), text);
        }
    }
}
