//! Dimensional bookkeeping for descriptors.
//!
//! A unit is a vector of rational exponents over the seven SI base
//! dimensions (kg, m, s, A, K, mol, cd). Operator unit rules either produce
//! an output unit or reject the construction as non-physical; rejected
//! descriptors are removed by the unit filter.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Exact rational exponent. Kept reduced with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn from_int(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        Rational::new(self.num * other.den - other.num * self.den, self.den * other.den)
    }

    pub fn scale(&self, num: i64, den: i64) -> Rational {
        Rational::new(self.num * num, self.den * den)
    }

    pub fn neg(&self) -> Rational {
        Rational::new(-self.num, self.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

pub const BASE_DIMENSIONS: [&str; 7] = ["kg", "m", "s", "A", "K", "mol", "cd"];

/// Rational exponents over the seven base dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitVec {
    exps: [Rational; 7],
}

impl UnitVec {
    pub fn dimensionless() -> Self {
        UnitVec {
            exps: [Rational::zero(); 7],
        }
    }

    pub fn base(symbol: &str) -> Option<Self> {
        let idx = BASE_DIMENSIONS.iter().position(|&s| s == symbol)?;
        let mut u = UnitVec::dimensionless();
        u.exps[idx] = Rational::from_int(1);
        Some(u)
    }

    pub fn is_dimensionless(&self) -> bool {
        self.exps.iter().all(Rational::is_zero)
    }

    pub fn multiply(&self, other: &UnitVec) -> UnitVec {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(&other.exps) {
            *e = e.add(o);
        }
        UnitVec { exps }
    }

    pub fn divide(&self, other: &UnitVec) -> UnitVec {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(&other.exps) {
            *e = e.sub(o);
        }
        UnitVec { exps }
    }

    pub fn pow_rational(&self, num: i64, den: i64) -> UnitVec {
        let mut exps = self.exps;
        for e in exps.iter_mut() {
            *e = e.scale(num, den);
        }
        UnitVec { exps }
    }

    pub fn invert(&self) -> UnitVec {
        let mut exps = self.exps;
        for e in exps.iter_mut() {
            *e = e.neg();
        }
        UnitVec { exps }
    }

    /// Parses strings like `kg^1*m^2*s^-2`, `m^(1/2)`, `K`, or the
    /// dimensionless markers `1`, `-`, and the empty string.
    pub fn parse(text: &str) -> Result<UnitVec> {
        let text = text.trim();
        if text.is_empty() || text == "1" || text == "-" {
            return Ok(UnitVec::dimensionless());
        }
        let mut out = UnitVec::dimensionless();
        for term in text.split('*') {
            let term = term.trim();
            let (symbol, exp) = match term.split_once('^') {
                None => (term, Rational::from_int(1)),
                Some((sym, e)) => (sym.trim(), parse_exponent(e.trim())?),
            };
            let idx = BASE_DIMENSIONS
                .iter()
                .position(|&s| s == symbol)
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "unknown base dimension '{symbol}' (expected one of {})",
                        BASE_DIMENSIONS.join(", ")
                    ))
                })?;
            out.exps[idx] = out.exps[idx].add(&exp);
        }
        Ok(out)
    }
}

fn parse_exponent(text: &str) -> Result<Rational> {
    let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(text);
    let bad = |t: &str| Error::Invalid(format!("bad unit exponent '{t}'"));
    match inner.split_once('/') {
        None => inner
            .parse::<i64>()
            .map(Rational::from_int)
            .map_err(|_| bad(text)),
        Some((n, d)) => {
            let num = n.trim().parse::<i64>().map_err(|_| bad(text))?;
            let den = d.trim().parse::<i64>().map_err(|_| bad(text))?;
            if den <= 0 {
                return Err(bad(text));
            }
            Ok(Rational::new(num, den))
        }
    }
}

impl fmt::Display for UnitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, e) in self.exps.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e.den == 1 {
                write!(f, "{}^{}", BASE_DIMENSIONS[i], e.num)?;
            } else {
                write!(f, "{}^({}/{})", BASE_DIMENSIONS[i], e.num, e.den)?;
            }
        }
        Ok(())
    }
}
