//! Number backends: exact rationals and fixed-precision binary floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu::base::{Approximation, BitTest, SquareRoot, UnsignedAbs};
use dashu::float::round::mode::HalfAway;
use dashu::float::{DBig, FBig};
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

use crate::error::{Error, Result};

/// Binary floating point number with explicit precision.
pub type Flt = FBig<HalfAway, 2>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Rational,
    Float { bits: usize },
}

impl Backend {
    pub fn float(bits: usize) -> Self {
        Backend::Float { bits: bits.max(64) }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rational" {
            return Ok(Backend::Rational);
        }
        if let Some(rest) = s.strip_prefix("float") {
            let bits = if rest.is_empty() {
                256
            } else {
                rest.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad backend `{s}`")))?
            };
            return Ok(Backend::float(bits));
        }
        Err(Error::Parse(format!("unknown backend `{s}`")))
    }

    pub fn name(&self) -> String {
        match self {
            Backend::Rational => "rational".into(),
            Backend::Float { bits } => format!("float{bits}"),
        }
    }

    pub fn bits(&self) -> Option<usize> {
        match self {
            Backend::Rational => None,
            Backend::Float { bits } => Some(*bits),
        }
    }

    pub fn zero(&self) -> Real {
        self.from_int(0)
    }

    pub fn from_int(&self, n: i64) -> Real {
        self.from_rational(RBig::from(n))
    }

    pub fn from_rational(&self, r: RBig) -> Real {
        match self {
            Backend::Rational => Real::Exact(r),
            Backend::Float { bits } => Real::Float(rational_to_flt(&r, *bits)),
        }
    }

    /// Exact conversion of the binary value of `x`.
    pub fn from_f64(&self, x: f64) -> Real {
        self.from_rational(RBig::try_from(x).unwrap_or(RBig::ZERO))
    }

    pub fn from_ibig(&self, n: &IBig) -> Real {
        self.from_rational(RBig::from(n.clone()))
    }

    /// Parses an arithmetic expression built from decimal numbers, `+ - * /`,
    /// parentheses and `sqrt(..)`.
    pub fn parse_value(&self, s: &str) -> Result<Real> {
        let mut p = ExprParser { src: s.as_bytes(), pos: 0, backend: *self };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!("trailing input in `{s}`")));
        }
        Ok(v)
    }

    /// Relative tolerance used for tie and connection tests (may underflow).
    pub fn tolerance(&self) -> f64 {
        self.ln_tolerance().exp()
    }

    /// Natural log of the relative tolerance `2^(-bits/2)`.
    pub fn ln_tolerance(&self) -> f64 {
        match self {
            Backend::Rational => f64::NEG_INFINITY,
            Backend::Float { bits } => -((*bits / 2) as f64) * std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Real {
    Exact(RBig),
    Float(Flt),
}

pub fn rational_to_flt(r: &RBig, bits: usize) -> Flt {
    let n = Flt::from(r.numerator().clone()).with_precision(bits + 8).value();
    let d = Flt::from(IBig::from(r.denominator().clone())).with_precision(bits + 8).value();
    (n / d).with_precision(bits).value()
}

/// Natural log of |n| for arbitrarily large integers.
pub fn ibig_ln(n: &IBig) -> f64 {
    let m = n.unsigned_abs();
    let bl = m.bit_len();
    if bl == 0 {
        return f64::NEG_INFINITY;
    }
    if bl <= 1000 {
        return ubig_to_f64(&m).ln();
    }
    let shift = bl - 64;
    let top: UBig = &m >> shift;
    ubig_to_f64(&top).ln() + shift as f64 * std::f64::consts::LN_2
}

fn ubig_to_f64(m: &UBig) -> f64 {
    match m.to_f64() {
        Approximation::Exact(v) | Approximation::Inexact(v, _) => v,
    }
}

pub fn ibig_to_f64(n: &IBig) -> f64 {
    match n.to_f64() {
        Approximation::Exact(v) | Approximation::Inexact(v, _) => v,
    }
}

pub fn flt_to_f64(x: &Flt) -> f64 {
    match x.to_f64() {
        Approximation::Exact(v) | Approximation::Inexact(v, _) => v,
    }
}

/// Natural log of |x| without overflow.
pub fn flt_ln_abs(x: &Flt) -> f64 {
    let sig = x.repr().significand();
    if *sig == IBig::ZERO {
        return f64::NEG_INFINITY;
    }
    ibig_ln(sig) + x.repr().exponent() as f64 * std::f64::consts::LN_2
}

pub fn flt(x: f64, bits: usize) -> Flt {
    Flt::try_from(x).unwrap_or(Flt::ZERO).with_precision(bits).value()
}

pub fn flt_int(n: &IBig, bits: usize) -> Flt {
    Flt::from(n.clone()).with_precision(bits).value()
}

fn flt_decimal(x: &Flt) -> String {
    let digits = (x.precision() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let d: DBig = x.clone().with_base_and_precision::<10>(digits).value();
    d.to_string()
}

impl Real {
    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => match r.to_f64() {
                Approximation::Exact(v) | Approximation::Inexact(v, _) => v,
            },
            Real::Float(f) => flt_to_f64(f),
        }
    }

    pub fn to_flt(&self, bits: usize) -> Flt {
        match self {
            Real::Exact(r) => rational_to_flt(r, bits),
            Real::Float(f) => f.clone().with_precision(bits).value(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => *r == RBig::ZERO,
            Real::Float(f) => *f.repr().significand() == IBig::ZERO,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Real::Exact(r) => *r < RBig::ZERO,
            Real::Float(f) => *f.repr().significand() < IBig::ZERO,
        }
    }

    pub fn abs(&self) -> Real {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn ln_abs(&self) -> f64 {
        match self {
            Real::Exact(r) => ibig_ln(r.numerator()) - ibig_ln(&IBig::from(r.denominator().clone())),
            Real::Float(f) => flt_ln_abs(f),
        }
    }

    /// Multiplies by an integer.
    pub fn mul_int(&self, n: &IBig) -> Real {
        match self {
            Real::Exact(r) => Real::Exact(r * RBig::from(n.clone())),
            Real::Float(f) => Real::Float(f * Flt::from(n.clone())),
        }
    }

    /// Decimal (float) or `p/q` (rational) string that parses back to the same value.
    pub fn to_decimal_string(&self) -> String {
        match self {
            Real::Exact(r) => {
                if *r.denominator() == UBig::ONE {
                    r.numerator().to_string()
                } else {
                    format!("{}/{}", r.numerator(), r.denominator())
                }
            }
            Real::Float(f) => flt_decimal(f),
        }
    }

    pub fn sqrt(&self) -> Result<Real> {
        match self {
            Real::Float(f) => Ok(Real::Float(f.sqrt())),
            Real::Exact(r) => {
                let n = r.numerator().unsigned_abs();
                let d = r.denominator().clone();
                let (sn, sd) = (n.sqrt(), d.sqrt());
                if *r < RBig::ZERO || &sn * &sn != n || &sd * &sd != d {
                    Err(Error::Parse("sqrt of a non-square rational in the rational backend".into()))
                } else {
                    Ok(Real::Exact(RBig::from_parts(IBig::from(sn), sd)))
                }
            }
        }
    }
}

fn promote(a: &Real, b: &Real) -> (Real, Real) {
    match (a, b) {
        (Real::Exact(x), Real::Float(y)) => (Real::Float(rational_to_flt(x, y.precision())), b.clone()),
        (Real::Float(x), Real::Exact(y)) => (a.clone(), Real::Float(rational_to_flt(y, x.precision()))),
        _ => (a.clone(), b.clone()),
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                match (self, rhs) {
                    (Real::Exact(x), Real::Exact(y)) => Real::Exact(x $op y),
                    (Real::Float(x), Real::Float(y)) => Real::Float(x $op y),
                    _ => {
                        let (a, b) = promote(self, rhs);
                        &a $op &b
                    }
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                &self $op &rhs
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                &self $op rhs
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(x) => Real::Exact(-x),
            Real::Float(x) => Real::Float(-x),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(x), Real::Exact(y)) => x.partial_cmp(y),
            (Real::Float(x), Real::Float(y)) => x.partial_cmp(y),
            _ => {
                let (a, b) = promote(self, other);
                a.partial_cmp(&b)
            }
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    backend: Backend,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at offset {} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn expr(&mut self) -> Result<Real> {
        let mut v = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    v = v + self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    v = v - self.term()?;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Real> {
        let mut v = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    v = v * self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if d.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    v = v / d;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<Real> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b's') => {
                if !self.src[self.pos..].starts_with(b"sqrt") {
                    return Err(self.err("unknown identifier"));
                }
                self.pos += 4;
                if self.peek() != Some(b'(') {
                    return Err(self.err("expected `(` after sqrt"));
                }
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                if v.is_negative() {
                    return Err(self.err("sqrt of a negative number"));
                }
                v.sqrt()
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            _ => Err(self.err("unexpected token")),
        }
    }

    fn number(&mut self) -> Result<Real> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let mantissa = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut exp10: i64 = 0;
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            self.pos += 1;
            let es = self.pos;
            if self.pos < self.src.len() && (self.src[self.pos] == b'-' || self.src[self.pos] == b'+') {
                self.pos += 1;
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            exp10 = std::str::from_utf8(&self.src[es..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("bad exponent"))?;
        }
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((a, b)) => (a, b),
            None => (mantissa, ""),
        };
        if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
            return Err(self.err("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let n: IBig = digits.parse().map_err(|_| self.err("malformed number"))?;
        exp10 -= frac_part.len() as i64;
        let ten = UBig::from(10u8);
        let r = if exp10 >= 0 {
            RBig::from(n * IBig::from(ten.pow(exp10 as usize)))
        } else {
            RBig::from_parts(n, ten.pow((-exp10) as usize))
        };
        Ok(self.backend.from_rational(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_decimals_and_fractions() {
        let b = Backend::Rational;
        assert_eq!(b.parse_value("0.6").unwrap(), b.parse_value("3/5").unwrap());
        assert_eq!(b.parse_value("1e-2").unwrap(), b.parse_value("1/100").unwrap());
        assert_eq!(b.parse_value("-(2 - 0.5)*2").unwrap(), b.from_int(-3));
        assert!(b.parse_value("sqrt(2)").is_err());
        assert_eq!(b.parse_value("sqrt(9/4)").unwrap(), b.parse_value("1.5").unwrap());
    }

    #[test]
    fn golden_mean_in_float_backend() {
        let b = Backend::float(256);
        let g = b.parse_value("(sqrt(5)-1)/2").unwrap();
        assert!((g.to_f64() - 0.618_033_988_749_894_8).abs() < 1e-15);
        let back = b.parse_value(&g.to_decimal_string()).unwrap();
        let diff = (back - g).abs().to_f64();
        assert!(diff < 1e-70);
    }

    #[test]
    fn logs_of_huge_integers() {
        let n = IBig::from(3u8).pow(2000);
        assert!((ibig_ln(&n) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        let f = flt_int(&n, 128);
        assert!((flt_ln_abs(&f) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }
}
