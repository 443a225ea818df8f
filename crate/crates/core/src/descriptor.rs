//! Descriptor algebra: expression trees over primary-feature leaves and
//! algebraic operators, with canonicalization, a text grammar, and unit
//! propagation.
//!
//! Grammar (whitespace insignificant):
//!   leaves   `x<k>` (1-based)
//!   unary    `exp(E)`, `log(E)`, `abs(E)`, `sqrt(E)`, `inv(E)` or `(E^-1)`,
//!            `(E^2)`, `sin(pi*E)`, `cos(pi*E)`
//!   binary   `(E+E)`, `(E-E)`, `(E*E)`, `(E/E)`, `|E-E|` (also accepted as
//!            `abs(E-E)`)
//!
//! Canonical form sorts commutative arguments, eliminates identity, rewrites
//! explicit self-multiplication as a square, and folds `abs` over a
//! difference into the single absolute-difference operator.

use crate::error::{Error, Result};
use crate::units::UnitVec;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Algebraic operators available for descriptor construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "add")]
    Add,
    #[serde(rename = "subtract")]
    Subtract,
    #[serde(rename = "multiply")]
    Multiply,
    #[serde(rename = "divide")]
    Divide,
    #[serde(rename = "abs-difference")]
    AbsDiff,
    #[serde(rename = "reciprocal")]
    Reciprocal,
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "square-root")]
    Sqrt,
    #[serde(rename = "logarithm")]
    Log,
    #[serde(rename = "exponential")]
    Exp,
    #[serde(rename = "absolute-value")]
    Abs,
    #[serde(rename = "sine-pi")]
    SinPi,
    #[serde(rename = "cosine-pi")]
    CosPi,
}

/// Non-identity unary operators, in generation order.
pub const UNARY_OPS: [Operator; 8] = [
    Operator::Reciprocal,
    Operator::Square,
    Operator::Sqrt,
    Operator::Log,
    Operator::Exp,
    Operator::Abs,
    Operator::SinPi,
    Operator::CosPi,
];

/// Non-identity binary operators, in generation order.
pub const BINARY_OPS: [Operator; 5] = [
    Operator::Add,
    Operator::Subtract,
    Operator::Multiply,
    Operator::Divide,
    Operator::AbsDiff,
];

impl Operator {
    pub fn arity(self) -> usize {
        match self {
            Operator::Add
            | Operator::Subtract
            | Operator::Multiply
            | Operator::Divide
            | Operator::AbsDiff => 2,
            _ => 1,
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, Operator::Add | Operator::Multiply | Operator::AbsDiff)
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Identity => "identity",
            Operator::Add => "add",
            Operator::Subtract => "subtract",
            Operator::Multiply => "multiply",
            Operator::Divide => "divide",
            Operator::AbsDiff => "abs-difference",
            Operator::Reciprocal => "reciprocal",
            Operator::Square => "square",
            Operator::Sqrt => "square-root",
            Operator::Log => "logarithm",
            Operator::Exp => "exponential",
            Operator::Abs => "absolute-value",
            Operator::SinPi => "sine-pi",
            Operator::CosPi => "cosine-pi",
        }
    }

    /// Entry-wise scalar evaluation of a unary operator.
    pub fn apply1(self, x: f64) -> f64 {
        match self {
            Operator::Identity => x,
            Operator::Reciprocal => 1.0 / x,
            Operator::Square => x * x,
            Operator::Sqrt => x.sqrt(),
            Operator::Log => x.ln(),
            Operator::Exp => x.exp(),
            Operator::Abs => x.abs(),
            Operator::SinPi => (PI * x).sin(),
            Operator::CosPi => (PI * x).cos(),
            _ => unreachable!("binary operator applied to one argument"),
        }
    }

    /// Entry-wise scalar evaluation of a binary operator.
    pub fn apply2(self, a: f64, b: f64) -> f64 {
        match self {
            Operator::Add => a + b,
            Operator::Subtract => a - b,
            Operator::Multiply => a * b,
            Operator::Divide => a / b,
            Operator::AbsDiff => (a - b).abs(),
            _ => unreachable!("unary operator applied to two arguments"),
        }
    }

    /// Unit rule: output units from input units, or `None` when the
    /// construction is non-physical.
    pub fn apply_units(self, inputs: &[UnitVec]) -> Option<UnitVec> {
        match self {
            Operator::Identity | Operator::Abs => Some(inputs[0]),
            Operator::Add | Operator::Subtract | Operator::AbsDiff => {
                (inputs[0] == inputs[1]).then_some(inputs[0])
            }
            Operator::Multiply => Some(inputs[0].multiply(&inputs[1])),
            Operator::Divide => Some(inputs[0].divide(&inputs[1])),
            Operator::Reciprocal => Some(inputs[0].invert()),
            Operator::Square => Some(inputs[0].pow_rational(2, 1)),
            Operator::Sqrt => Some(inputs[0].pow_rational(1, 2)),
            Operator::Log | Operator::Exp | Operator::SinPi | Operator::CosPi => {
                inputs[0].is_dimensionless().then(UnitVec::dimensionless)
            }
        }
    }
}

/// Expression node. Identity never appears inside a canonical tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// 0-based primary-feature index (displayed 1-based).
    Leaf(usize),
    Unary(Operator, Arc<Expr>),
    Binary(Operator, Arc<Expr>, Arc<Expr>),
}

fn render(expr: &Expr) -> String {
    match expr {
        Expr::Leaf(i) => format!("x{}", i + 1),
        Expr::Unary(op, e) => {
            let inner = render(e);
            match op {
                Operator::Reciprocal => format!("inv({inner})"),
                Operator::Square => format!("({inner}^2)"),
                Operator::Sqrt => format!("sqrt({inner})"),
                Operator::Log => format!("log({inner})"),
                Operator::Exp => format!("exp({inner})"),
                Operator::Abs => format!("abs({inner})"),
                Operator::SinPi => format!("sin(pi*{inner})"),
                Operator::CosPi => format!("cos(pi*{inner})"),
                _ => unreachable!(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (render(a), render(b));
            match op {
                Operator::Add => format!("({a}+{b})"),
                Operator::Subtract => format!("({a}-{b})"),
                Operator::Multiply => format!("({a}*{b})"),
                Operator::Divide => format!("({a}/{b})"),
                Operator::AbsDiff => format!("|{a}-{b}|"),
                _ => unreachable!(),
            }
        }
    }
}

/// Expressions that are nonnegative for every input, by construction.
fn is_nonnegative(expr: &Expr) -> bool {
    matches!(
        expr,
        Expr::Unary(Operator::Square | Operator::Abs | Operator::Exp | Operator::Sqrt, _)
            | Expr::Binary(Operator::AbsDiff, _, _)
    )
}

fn canonicalize(expr: &Expr) -> Arc<Expr> {
    match expr {
        Expr::Leaf(i) => Arc::new(Expr::Leaf(*i)),
        Expr::Unary(Operator::Identity, e) => canonicalize(e),
        Expr::Unary(Operator::Abs, e) => {
            let c = canonicalize(e);
            if let Expr::Binary(Operator::Subtract, a, b) = &*c {
                // |a - b| is the single absolute-difference operator.
                return order_commutative(Operator::AbsDiff, a.clone(), b.clone());
            }
            if is_nonnegative(&c) {
                return c;
            }
            Arc::new(Expr::Unary(Operator::Abs, c))
        }
        Expr::Unary(Operator::Square, e) => {
            let c = canonicalize(e);
            // Squaring absorbs sign information: |E|^2 = E^2, |a-b|^2 and
            // (a-b)^2 share one canonical form with ordered operands.
            match &*c {
                Expr::Unary(Operator::Abs, inner) => {
                    Arc::new(Expr::Unary(Operator::Square, inner.clone()))
                }
                Expr::Binary(Operator::AbsDiff | Operator::Subtract, a, b) => {
                    let (lo, hi) = if render(a) <= render(b) {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    };
                    Arc::new(Expr::Unary(
                        Operator::Square,
                        Arc::new(Expr::Binary(Operator::Subtract, lo, hi)),
                    ))
                }
                _ => Arc::new(Expr::Unary(Operator::Square, c)),
            }
        }
        Expr::Unary(Operator::Sqrt, e) => {
            let c = canonicalize(e);
            // sqrt(E^2) = |E|; re-run the abs rules on the result.
            if let Expr::Unary(Operator::Square, inner) = &*c {
                return canonicalize(&Expr::Unary(Operator::Abs, inner.clone()));
            }
            Arc::new(Expr::Unary(Operator::Sqrt, c))
        }
        Expr::Unary(op, e) => Arc::new(Expr::Unary(*op, canonicalize(e))),
        Expr::Binary(op, a, b) => {
            let (ca, cb) = (canonicalize(a), canonicalize(b));
            if *op == Operator::Multiply && render(&ca) == render(&cb) {
                return canonicalize(&Expr::Unary(Operator::Square, ca));
            }
            if op.is_commutative() {
                return order_commutative(*op, ca, cb);
            }
            Arc::new(Expr::Binary(*op, ca, cb))
        }
    }
}

fn order_commutative(op: Operator, a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    if render(&a) <= render(&b) {
        Arc::new(Expr::Binary(op, a, b))
    } else {
        Arc::new(Expr::Binary(op, b, a))
    }
}

fn complexity_of(expr: &Expr) -> u32 {
    match expr {
        Expr::Leaf(_) => 0,
        Expr::Unary(_, e) => 1 + complexity_of(e),
        Expr::Binary(_, a, b) => 1 + complexity_of(a).max(complexity_of(b)),
    }
}

fn max_leaf(expr: &Expr) -> usize {
    match expr {
        Expr::Leaf(i) => *i,
        Expr::Unary(_, e) => max_leaf(e),
        Expr::Binary(_, a, b) => max_leaf(a).max(max_leaf(b)),
    }
}

/// Unit assignment for the primary features a descriptor is built over.
#[derive(Debug, Clone)]
pub enum UnitContext {
    /// No units row supplied: every leaf is dimensionless and nothing can
    /// violate a unit rule.
    Dimensionless,
    Explicit(Vec<UnitVec>),
}

impl UnitContext {
    fn leaf(&self, idx: usize) -> Option<UnitVec> {
        match self {
            UnitContext::Dimensionless => Some(UnitVec::dimensionless()),
            UnitContext::Explicit(units) => units.get(idx).copied(),
        }
    }
}

/// Units of a descriptor under a given context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorUnits {
    Consistent(UnitVec),
    /// Some operator application along the tree violated its unit rule.
    Violated,
}

impl DescriptorUnits {
    pub fn is_violated(&self) -> bool {
        matches!(self, DescriptorUnits::Violated)
    }
}

fn fold_units(expr: &Expr, ctx: &UnitContext) -> DescriptorUnits {
    fn go(expr: &Expr, ctx: &UnitContext) -> Option<UnitVec> {
        match expr {
            Expr::Leaf(i) => ctx.leaf(*i),
            Expr::Unary(op, e) => op.apply_units(&[go(e, ctx)?]),
            Expr::Binary(op, a, b) => op.apply_units(&[go(a, ctx)?, go(b, ctx)?]),
        }
    }
    match go(expr, ctx) {
        Some(u) => DescriptorUnits::Consistent(u),
        None => DescriptorUnits::Violated,
    }
}

/// An immutable descriptor: canonical expression tree, nontrivial composition
/// complexity, derived units, and the canonical infix string.
#[derive(Debug, Clone)]
pub struct Descriptor {
    root: Arc<Expr>,
    complexity: u32,
    units: DescriptorUnits,
    display: String,
}

impl Descriptor {
    pub fn from_expr(expr: &Expr, ctx: &UnitContext) -> Descriptor {
        let root = canonicalize(expr);
        let display = render(&root);
        let complexity = complexity_of(&root);
        let units = fold_units(&root, ctx);
        Descriptor {
            root,
            complexity,
            units,
            display,
        }
    }

    pub fn leaf(idx: usize, ctx: &UnitContext) -> Descriptor {
        Descriptor::from_expr(&Expr::Leaf(idx), ctx)
    }

    /// Applies a unary operator. `Identity` returns a copy of the input.
    pub fn apply_unary(op: Operator, d: &Descriptor, ctx: &UnitContext) -> Descriptor {
        debug_assert_eq!(op.arity(), 1);
        if op == Operator::Identity {
            return d.clone();
        }
        Descriptor::from_expr(&Expr::Unary(op, d.root.clone()), ctx)
    }

    pub fn apply_binary(
        op: Operator,
        a: &Descriptor,
        b: &Descriptor,
        ctx: &UnitContext,
    ) -> Descriptor {
        debug_assert_eq!(op.arity(), 2);
        Descriptor::from_expr(&Expr::Binary(op, a.root.clone(), b.root.clone()), ctx)
    }

    /// Parses descriptor text and canonicalizes it (dimensionless units).
    pub fn parse(text: &str) -> Result<Descriptor> {
        let expr = Parser::new(text).parse_all()?;
        Ok(Descriptor::from_expr(&expr, &UnitContext::Dimensionless))
    }

    /// Parses under an explicit unit context.
    pub fn parse_with_units(text: &str, ctx: &UnitContext) -> Result<Descriptor> {
        let expr = Parser::new(text).parse_all()?;
        Ok(Descriptor::from_expr(&expr, ctx))
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn complexity(&self) -> u32 {
        self.complexity
    }

    pub fn units(&self) -> &DescriptorUnits {
        &self.units
    }

    /// Canonical infix serialization; round-trips through [`Descriptor::parse`].
    pub fn canonical_string(&self) -> &str {
        &self.display
    }

    /// Highest 0-based leaf index referenced by the tree.
    pub fn max_leaf_index(&self) -> usize {
        max_leaf(&self.root)
    }

    /// Canonical string with leaf names substituted, for human-facing output.
    pub fn display_with_names(&self, names: &[String]) -> String {
        fn go(expr: &Expr, names: &[String], out: &mut String) {
            match expr {
                Expr::Leaf(i) => match names.get(*i) {
                    Some(n) => out.push_str(n),
                    None => out.push_str(&format!("x{}", i + 1)),
                },
                _ => {
                    // Re-render through the canonical printer, swapping leaves.
                    let s = match expr {
                        Expr::Unary(op, e) => {
                            let mut inner = String::new();
                            go(e, names, &mut inner);
                            match op {
                                Operator::Reciprocal => format!("inv({inner})"),
                                Operator::Square => format!("({inner}^2)"),
                                Operator::Sqrt => format!("sqrt({inner})"),
                                Operator::Log => format!("log({inner})"),
                                Operator::Exp => format!("exp({inner})"),
                                Operator::Abs => format!("abs({inner})"),
                                Operator::SinPi => format!("sin(pi*{inner})"),
                                Operator::CosPi => format!("cos(pi*{inner})"),
                                _ => unreachable!(),
                            }
                        }
                        Expr::Binary(op, a, b) => {
                            let mut sa = String::new();
                            let mut sb = String::new();
                            go(a, names, &mut sa);
                            go(b, names, &mut sb);
                            match op {
                                Operator::Add => format!("({sa}+{sb})"),
                                Operator::Subtract => format!("({sa}-{sb})"),
                                Operator::Multiply => format!("({sa}*{sb})"),
                                Operator::Divide => format!("({sa}/{sb})"),
                                Operator::AbsDiff => format!("|{sa}-{sb}|"),
                                _ => unreachable!(),
                            }
                        }
                        Expr::Leaf(_) => unreachable!(),
                    };
                    out.push_str(&s);
                }
            }
        }
        let mut out = String::new();
        go(&self.root, names, &mut out);
        out
    }

    /// Entry-wise evaluation over feature columns. Rejects non-finite
    /// results and entries beyond `magnitude_cap`.
    pub fn evaluate(&self, columns: &[Vec<f64>], magnitude_cap: f64) -> Result<Vec<f64>> {
        fn go(expr: &Expr, columns: &[Vec<f64>], cap: f64) -> Result<Vec<f64>> {
            match expr {
                Expr::Leaf(i) => columns.get(*i).cloned().ok_or(Error::UnknownLeaf {
                    leaf: *i + 1,
                    width: columns.len(),
                }),
                Expr::Unary(op, e) => {
                    let mut v = go(e, columns, cap)?;
                    for (row, x) in v.iter_mut().enumerate() {
                        *x = op.apply1(*x);
                        if !x.is_finite() || x.abs() > cap {
                            return Err(Error::DomainViolation {
                                op: op.name(),
                                row,
                            });
                        }
                    }
                    Ok(v)
                }
                Expr::Binary(op, a, b) => {
                    let mut va = go(a, columns, cap)?;
                    let vb = go(b, columns, cap)?;
                    for (row, (x, y)) in va.iter_mut().zip(&vb).enumerate() {
                        *x = op.apply2(*x, *y);
                        if !x.is_finite() || x.abs() > cap {
                            return Err(Error::DomainViolation {
                                op: op.name(),
                                row,
                            });
                        }
                    }
                    Ok(va)
                }
            }
        }
        go(&self.root, columns, magnitude_cap)
    }
}

impl PartialEq for Descriptor {
    fn eq(&self, other: &Self) -> bool {
        self.display == other.display
    }
}

impl Eq for Descriptor {}

impl std::hash::Hash for Descriptor {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.display.hash(state);
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

impl Serialize for Descriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.display)
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Descriptor::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected '{}', found '{}'", ch as char, c as char))),
            None => Err(self.err(format!("expected '{}', found end of input", ch as char))),
        }
    }

    fn parse_all(&mut self) -> Result<Expr> {
        let expr = self.parse_expr()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.err("trailing input after descriptor"));
        }
        Ok(expr)
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'x') => self.parse_leaf(),
            Some(b'(') => self.parse_paren(),
            Some(b'|') => self.parse_abs_group(),
            Some(c) if c.is_ascii_alphabetic() => self.parse_named(),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn parse_leaf(&mut self) -> Result<Expr> {
        self.expect(b'x')?;
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected feature number after 'x'"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let idx: usize = text
            .parse()
            .map_err(|_| self.err(format!("feature number '{text}' out of range")))?;
        if idx == 0 {
            return Err(self.err("feature indices are 1-based"));
        }
        Ok(Expr::Leaf(idx - 1))
    }

    fn parse_paren(&mut self) -> Result<Expr> {
        self.expect(b'(')?;
        let lhs = self.parse_expr()?;
        let op = match self.peek() {
            Some(b'+') => Operator::Add,
            Some(b'-') => Operator::Subtract,
            Some(b'*') => Operator::Multiply,
            Some(b'/') => Operator::Divide,
            Some(b'^') => {
                self.pos += 1;
                return self.finish_power(lhs);
            }
            Some(c) => return Err(self.err(format!("expected operator, found '{}'", c as char))),
            None => return Err(self.err("expected operator, found end of input")),
        };
        self.pos += 1;
        let rhs = self.parse_expr()?;
        self.expect(b')')?;
        Ok(Expr::Binary(op, Arc::new(lhs), Arc::new(rhs)))
    }

    fn finish_power(&mut self, base: Expr) -> Result<Expr> {
        // `(E^2)` is square, `(E^-1)` is reciprocal.
        match self.peek() {
            Some(b'2') => {
                self.pos += 1;
                self.expect(b')')?;
                Ok(Expr::Unary(Operator::Square, Arc::new(base)))
            }
            Some(b'-') => {
                self.pos += 1;
                self.expect(b'1')?;
                self.expect(b')')?;
                Ok(Expr::Unary(Operator::Reciprocal, Arc::new(base)))
            }
            _ => Err(self.err("expected '2' or '-1' after '^'")),
        }
    }

    fn parse_abs_group(&mut self) -> Result<Expr> {
        self.expect(b'|')?;
        let lhs = self.parse_expr()?;
        self.expect(b'-')?;
        let rhs = self.parse_expr()?;
        self.expect(b'|')?;
        Ok(Expr::Binary(Operator::AbsDiff, Arc::new(lhs), Arc::new(rhs)))
    }

    fn parse_named(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match name {
            "exp" | "log" | "sqrt" | "inv" => {
                let op = match name {
                    "exp" => Operator::Exp,
                    "log" => Operator::Log,
                    "sqrt" => Operator::Sqrt,
                    _ => Operator::Reciprocal,
                };
                self.expect(b'(')?;
                let inner = self.parse_expr()?;
                self.expect(b')')?;
                Ok(Expr::Unary(op, Arc::new(inner)))
            }
            "abs" => {
                // `abs(E)` or the binary shorthand `abs(E-E)`.
                self.expect(b'(')?;
                let first = self.parse_expr()?;
                match self.peek() {
                    Some(b'-') => {
                        self.pos += 1;
                        let second = self.parse_expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Binary(
                            Operator::AbsDiff,
                            Arc::new(first),
                            Arc::new(second),
                        ))
                    }
                    _ => {
                        self.expect(b')')?;
                        Ok(Expr::Unary(Operator::Abs, Arc::new(first)))
                    }
                }
            }
            "sin" | "cos" => {
                let op = if name == "sin" {
                    Operator::SinPi
                } else {
                    Operator::CosPi
                };
                self.expect(b'(')?;
                self.skip_ws();
                if !self.bytes[self.pos..].starts_with(b"pi") {
                    return Err(self.err("expected 'pi*' inside sin/cos"));
                }
                self.pos += 2;
                self.expect(b'*')?;
                let inner = self.parse_expr()?;
                self.expect(b')')?;
                Ok(Expr::Unary(op, Arc::new(inner)))
            }
            other => Err(self.err(format!("unknown function '{other}'"))),
        }
    }
}
