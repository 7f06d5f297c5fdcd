//! Trivariate polynomials with a small text grammar.
//!
//! ```text
//! poly   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := ('+'|'-') factor | number ['/' integer] | var ['^' integer] | '(' poly ')'
//! var    := 'x1' | 'x2' | 'x3'
//! ```
//!
//! Parenthesised sub-expressions are accepted only when they are constant
//! (for example `(1/3)*x1`).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{GeometryError, Result};
use crate::scalar::{Real, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial<T> {
    pub coef: T,
    pub exps: [u32; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    /// Builds a polynomial, merging terms with equal exponents and dropping zeros.
    pub fn new(terms: impl IntoIterator<Item = Monomial<T>>) -> Self {
        let mut merged: BTreeMap<[u32; 3], T> = BTreeMap::new();
        for t in terms {
            *merged.entry(t.exps).or_insert_with(T::zero) += t.coef;
        }
        Self {
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(exps, coef)| Monomial { coef, exps })
                .collect(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::new([Monomial { coef: c, exps: [0; 3] }])
    }

    /// Linear form `c₀ + c₁x¹ + c₂x² + c₃x³`.
    pub fn linear(c0: T, c: Vec3<T>) -> Self {
        Self::new([
            Monomial { coef: c0, exps: [0, 0, 0] },
            Monomial { coef: c[0], exps: [1, 0, 0] },
            Monomial { coef: c[1], exps: [0, 1, 0] },
            Monomial { coef: c[2], exps: [0, 0, 1] },
        ])
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exps.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn eval(&self, p: &Vec3<T>) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| {
            acc + t.coef * p[0].powi(t.exps[0] as i32) * p[1].powi(t.exps[1] as i32) * p[2].powi(t.exps[2] as i32)
        })
    }

    pub fn gradient(&self, p: &Vec3<T>) -> Vec3<T> {
        let mut g = [T::zero(); 3];
        for t in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                let e = t.exps[k];
                if e == 0 {
                    continue;
                }
                let mut v = t.coef * T::from_u32(e).expect("exponent fits the scalar type");
                for (axis, &x) in p.iter().enumerate() {
                    let power = if axis == k { e - 1 } else { t.exps[axis] };
                    v *= x.powi(power as i32);
                }
                *gk += v;
            }
        }
        g
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser::new(text, 0);
        let poly = parser.poly()?;
        parser.skip_ws();
        if let Some(ch) = parser.peek() {
            return Err(parser.error(format!("unexpected character `{ch}`")));
        }
        Ok(poly)
    }
}

impl<T: Real> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            let (sign, mag) = if t.coef < T::zero() { ("-", -t.coef) } else { ("+", t.coef) };
            match (n, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            write!(f, "{mag}")?;
            for (k, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", k + 1)?,
                    _ => write!(f, "*x{}^{}", k + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Recursive-descent parser over a slice of a larger spec string. Error
/// positions are reported relative to the full string.
pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    offset: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str, offset: usize) -> Self {
        Self { src: text.as_bytes(), pos: 0, offset }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> GeometryError {
        GeometryError::Parse { position: self.offset + self.pos, message: message.into() }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src.get(self.pos).map(|&b| b as char)
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn poly<T: Real>(&mut self) -> Result<Polynomial<T>> {
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.error("expected a polynomial"));
        }
        let mut terms = Vec::new();
        let mut sign = if self.eat('-') {
            -T::one()
        } else {
            self.eat('+');
            T::one()
        };
        loop {
            for mut t in self.term::<T>()? {
                t.coef *= sign;
                terms.push(t);
            }
            if self.eat('+') {
                sign = T::one();
            } else if self.eat('-') {
                sign = -T::one();
            } else {
                break;
            }
        }
        Ok(Polynomial::new(terms))
    }

    fn term<T: Real>(&mut self) -> Result<Vec<Monomial<T>>> {
        let mut acc = vec![Monomial { coef: T::one(), exps: [0; 3] }];
        loop {
            let factor = self.factor::<T>()?;
            let mut next = Vec::with_capacity(acc.len() * factor.terms.len());
            for a in &acc {
                for b in &factor.terms {
                    next.push(Monomial {
                        coef: a.coef * b.coef,
                        exps: [a.exps[0] + b.exps[0], a.exps[1] + b.exps[1], a.exps[2] + b.exps[2]],
                    });
                }
            }
            acc = next;
            if !self.eat('*') {
                return Ok(acc);
            }
        }
    }

    fn factor<T: Real>(&mut self) -> Result<Polynomial<T>> {
        self.skip_ws();
        match self.peek() {
            Some(sign @ ('+' | '-')) => {
                self.pos += 1;
                let mut inner = self.factor::<T>()?;
                if sign == '-' {
                    inner.terms.iter_mut().for_each(|t| t.coef = -t.coef);
                }
                Ok(inner)
            }
            Some('x') | Some('X') => {
                self.pos += 1;
                let axis = match self.peek() {
                    Some(d @ '1'..='3') => d as usize - '1' as usize,
                    _ => return Err(self.error("expected variable x1, x2 or x3")),
                };
                self.pos += 1;
                let e = if self.eat('^') { self.integer()? } else { 1 };
                let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
                let mut exps = [0; 3];
                exps[axis] = e;
                Ok(Polynomial { terms: vec![Monomial { coef: T::one(), exps }] })
            }
            Some('(') => {
                self.pos += 1;
                let start = self.pos;
                let inner = self.poly::<T>()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                if !inner.is_constant() {
                    self.pos = start;
                    return Err(self.error("only constant sub-expressions may be parenthesised"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.number()?;
                let value = if self.eat('/') {
                    let den = self.integer()?;
                    if den == 0 {
                        return Err(self.error("division by zero"));
                    }
                    value / den as f64
                } else {
                    value
                };
                let coef = T::from_f64(value).ok_or_else(|| self.error("coefficient out of range"))?;
                Ok(Polynomial { terms: vec![Monomial { coef, exps: [0; 3] }] })
            }
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.error(format!("malformed number `{text}`"))
        })
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<u64>().map_err(|_| self.error("integer too large"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Polynomial<f64> {
        Polynomial::parse(text).unwrap()
    }

    #[test]
    fn parses_linear_forms() {
        let a = p("4*x1 + 2*x2");
        assert_eq!(a, Polynomial::linear(0.0, [4.0, 2.0, 0.0]));
        assert_eq!(a.eval(&[1.0, 0.0, 0.0]), 4.0);
        assert_eq!(a.gradient(&[7.0, -3.0, 2.0]), [4.0, 2.0, 0.0]);
    }

    #[test]
    fn parses_rationals_powers_and_signs() {
        let f = p("-1/4*x1^2*x3 + 0.5 - x2 + (2/3)*x2");
        let pt = [2.0, 3.0, -1.0];
        let expected = 0.25 * 4.0 + 0.5 - 3.0 + 2.0 / 3.0 * 3.0;
        assert!((f.eval(&pt) - expected).abs() < 1e-15);
        let g = f.gradient(&pt);
        assert!((g[0] - (0.5 * 2.0)).abs() < 1e-15);
        assert!((g[1] - (-1.0 + 2.0 / 3.0)).abs() < 1e-15);
        assert!((g[2] - (-0.25 * 4.0)).abs() < 1e-15);
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn merges_like_terms_and_drops_zeros() {
        let f = p("x1 - x1 + 0*x2");
        assert!(f.terms().is_empty());
        assert!(f.is_constant());
        assert_eq!(f.to_string(), "0");
    }

    #[test]
    fn unary_signs_on_factors() {
        assert_eq!(p("x1 * -2 - -x2"), Polynomial::linear(0.0, [-2.0, 1.0, 0.0]));
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(p("1e-3*x3").gradient(&[0.0; 3]), [0.0, 0.0, 1e-3]);
    }

    #[test]
    fn reports_error_positions() {
        let err = Polynomial::<f64>::parse("4*x1 + 2*y").unwrap_err();
        assert_eq!(err, GeometryError::Parse { position: 9, message: "unexpected character `y`".into() });
        let err = Polynomial::<f64>::parse("x4").unwrap_err();
        assert!(matches!(err, GeometryError::Parse { position: 1, .. }));
        assert!(Polynomial::<f64>::parse("").is_err());
        assert!(Polynomial::<f64>::parse("1/0").is_err());
        assert!(Polynomial::<f64>::parse("(x1)*x2").is_err());
        assert!(Polynomial::<f64>::parse("3 x1").is_err());
        assert!(Polynomial::<f64>::parse("x1 +").is_err());
    }

    #[test]
    fn display_round_trips() {
        let f = p("-2*x1^2*x2 + 3*x3 - 1/2");
        assert_eq!(p(&f.to_string()), f);
    }
}
