//! Evaluated descriptor spaces: ordered descriptors with their numeric
//! columns, plus the generation pipeline (unary/binary expansion, domain
//! filtering, unit filtering, correlation dedup).

use crate::data::Dataset;
use crate::descriptor::{Descriptor, Operator, UnitContext};
use crate::error::{Error, Result};
use crate::stats;
use serde::Serialize;
use std::collections::HashSet;

/// Options controlling one generation pass.
#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Entries with |value| beyond this are domain violations.
    pub magnitude_cap: f64,
    /// Absolute-correlation threshold for dedup; `None` skips dedup.
    pub dedup_threshold: Option<f64>,
    /// Drop descriptors whose construction violates unit rules.
    pub unit_filter: bool,
    /// Iteration tag recorded on newly created descriptors.
    pub origin: u32,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            magnitude_cap: 1e8,
            dedup_threshold: Some(DEFAULT_DEDUP_THRESHOLD),
            unit_filter: false,
            origin: 1,
        }
    }
}

/// "Perfectly correlated" made numerically testable.
pub const DEFAULT_DEDUP_THRESHOLD: f64 = 1.0 - 1e-10;

/// Counts from a generation pass.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GenReport {
    /// Candidates whose evaluation succeeded (identity copies included).
    pub emitted: usize,
    pub domain_dropped: usize,
    pub unit_dropped: usize,
    pub constant_dropped: usize,
    pub dedup_dropped: usize,
    /// Canonical strings of constant columns removed during dedup.
    pub constant_notices: Vec<String>,
}

/// An ordered collection of descriptors with evaluated columns and
/// per-descriptor provenance. Immutable once built.
#[derive(Debug, Clone)]
pub struct DescriptorSpace {
    descriptors: Vec<Descriptor>,
    columns: Vec<Vec<f64>>,
    origin: Vec<u32>,
    n_rows: usize,
    ctx: UnitContext,
}

impl DescriptorSpace {
    /// The primary features themselves, as complexity-0 descriptors.
    pub fn from_dataset(data: &Dataset) -> DescriptorSpace {
        let ctx = data.unit_context();
        let descriptors: Vec<Descriptor> = (0..data.n_features())
            .map(|i| Descriptor::leaf(i, &ctx))
            .collect();
        DescriptorSpace {
            origin: vec![0; descriptors.len()],
            descriptors,
            columns: data.columns.clone(),
            n_rows: data.n_rows,
            ctx,
        }
    }

    /// Assembles a space from prepared parts; duplicate canonical strings are
    /// collapsed (first occurrence wins).
    pub fn from_parts(
        descriptors: Vec<Descriptor>,
        columns: Vec<Vec<f64>>,
        origin: Vec<u32>,
        ctx: UnitContext,
        n_rows: usize,
    ) -> DescriptorSpace {
        let mut builder = Builder::new(ctx, n_rows);
        for ((d, c), o) in descriptors.into_iter().zip(columns).zip(origin) {
            builder.push(d, c, o);
        }
        builder.finish()
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn descriptor(&self, i: usize) -> &Descriptor {
        &self.descriptors[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn origin(&self, i: usize) -> u32 {
        self.origin[i]
    }

    pub fn unit_context(&self) -> &UnitContext {
        &self.ctx
    }

    /// The sub-space holding the given descriptor indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> DescriptorSpace {
        let mut builder = Builder::new(self.ctx.clone(), self.n_rows);
        for &i in indices {
            builder.push(
                self.descriptors[i].clone(),
                self.columns[i].clone(),
                self.origin[i],
            );
        }
        builder.finish()
    }

    /// Unary expansion: for each input descriptor, its identity copy plus
    /// every requested non-identity transform whose evaluation succeeds.
    pub fn generate_unary(
        &self,
        ops: &[Operator],
        opts: &GenOptions,
    ) -> Result<(DescriptorSpace, GenReport)> {
        if self.is_empty() {
            return Err(Error::EmptyInput("unary generation over an empty space"));
        }
        for op in ops {
            if op.arity() != 1 {
                return Err(Error::Invalid(format!(
                    "'{}' is not a unary operator",
                    op.name()
                )));
            }
        }
        let mut builder = Builder::new(self.ctx.clone(), self.n_rows);
        let mut report = GenReport::default();
        for i in 0..self.len() {
            builder.push(
                self.descriptors[i].clone(),
                self.columns[i].clone(),
                self.origin[i],
            );
            report.emitted += 1;
            for &op in ops.iter().filter(|op| **op != Operator::Identity) {
                match transform_column(op, &self.columns[i], None, opts.magnitude_cap) {
                    Some(col) => {
                        let d = Descriptor::apply_unary(op, &self.descriptors[i], &self.ctx);
                        builder.push(d, col, opts.origin);
                        report.emitted += 1;
                    }
                    None => report.domain_dropped += 1,
                }
            }
        }
        Ok(self.finish_generation(builder, report, opts))
    }

    /// Binary expansion: identity copies of all inputs, then one descriptor
    /// per non-identity operator per unordered pair {i, j} with i < j. The
    /// non-commutative operators keep the (i, j) orientation.
    pub fn generate_binary(
        &self,
        ops: &[Operator],
        opts: &GenOptions,
    ) -> Result<(DescriptorSpace, GenReport)> {
        if self.len() < 2 {
            return Err(Error::TooFewDescriptors(self.len()));
        }
        for op in ops {
            if *op != Operator::Identity && op.arity() != 2 {
                return Err(Error::Invalid(format!(
                    "'{}' is not a binary operator",
                    op.name()
                )));
            }
        }
        let mut builder = Builder::new(self.ctx.clone(), self.n_rows);
        let mut report = GenReport::default();
        for i in 0..self.len() {
            builder.push(
                self.descriptors[i].clone(),
                self.columns[i].clone(),
                self.origin[i],
            );
            report.emitted += 1;
        }
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                for &op in ops.iter().filter(|op| **op != Operator::Identity) {
                    match transform_column(
                        op,
                        &self.columns[i],
                        Some(&self.columns[j]),
                        opts.magnitude_cap,
                    ) {
                        Some(col) => {
                            let d = Descriptor::apply_binary(
                                op,
                                &self.descriptors[i],
                                &self.descriptors[j],
                                &self.ctx,
                            );
                            builder.push(d, col, opts.origin);
                            report.emitted += 1;
                        }
                        None => report.domain_dropped += 1,
                    }
                }
            }
        }
        Ok(self.finish_generation(builder, report, opts))
    }

    fn finish_generation(
        &self,
        builder: Builder,
        mut report: GenReport,
        opts: &GenOptions,
    ) -> (DescriptorSpace, GenReport) {
        let mut space = builder.finish();
        if opts.unit_filter {
            let (filtered, dropped) = space.unit_filter();
            space = filtered;
            report.unit_dropped = dropped;
        }
        if let Some(threshold) = opts.dedup_threshold {
            let (deduped, dd) = space.dedup(threshold);
            space = deduped;
            report.dedup_dropped = dd.correlated_dropped;
            report.constant_dropped = dd.constant_notices.len();
            report.constant_notices = dd.constant_notices;
        }
        (space, report)
    }

    /// Removes descriptors whose construction violated a unit rule. Returns
    /// the filtered space and the removal count.
    pub fn unit_filter(&self) -> (DescriptorSpace, usize) {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !self.descriptors[i].units().is_violated())
            .collect();
        let dropped = self.len() - keep.len();
        (self.subset(&keep), dropped)
    }

    /// Correlation dedup: among any group with pairwise |r| >= threshold the
    /// lowest-complexity, earliest-inserted member survives. Constant columns
    /// are removed (correlation with them is undefined) and reported.
    pub fn dedup(&self, threshold: f64) -> (DescriptorSpace, DedupReport) {
        assert!(
            threshold > 0.0 && threshold <= 1.0,
            "dedup threshold must be in (0, 1]"
        );
        let n = self.n_rows as f64;
        let mut report = DedupReport::default();
        // Standardize to unit norm so correlation is a dot product.
        let mut standardized: Vec<Option<Vec<f64>>> = Vec::with_capacity(self.len());
        for (i, col) in self.columns.iter().enumerate() {
            let m = col.iter().sum::<f64>() / n;
            let ss: f64 = col.iter().map(|v| (v - m) * (v - m)).sum();
            if ss <= 0.0 {
                report
                    .constant_notices
                    .push(self.descriptors[i].canonical_string().to_string());
                standardized.push(None);
            } else {
                let inv = 1.0 / ss.sqrt();
                standardized.push(Some(col.iter().map(|v| (v - m) * inv).collect()));
            }
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.descriptors[i].complexity(), i));
        let mut kept: Vec<usize> = Vec::new();
        for &i in &order {
            let Some(zi) = &standardized[i] else {
                continue;
            };
            let duplicate = kept.iter().any(|&k| {
                let zk = standardized[k].as_ref().unwrap();
                let dot: f64 = zi.iter().zip(zk).map(|(a, b)| a * b).sum();
                dot.abs() >= threshold
            });
            if duplicate {
                report.correlated_dropped += 1;
            } else {
                kept.push(i);
            }
        }
        kept.sort_unstable();
        (self.subset(&kept), report)
    }

    /// Maximum absolute Pearson correlation of any column with `y`, plus the
    /// descriptor index attaining it. Constant columns contribute 0.
    pub fn correlation_with(&self, y: &[f64]) -> Result<(f64, usize)> {
        if self.is_empty() {
            return Err(Error::EmptyInput("correlation scan over an empty space"));
        }
        if y.len() != self.n_rows {
            return Err(Error::Invalid(format!(
                "response length {} does not match {} rows",
                y.len(),
                self.n_rows
            )));
        }
        let mut best = (0.0f64, 0usize);
        for (i, col) in self.columns.iter().enumerate() {
            let r = stats::pearson(col, y).map_or(0.0, f64::abs);
            if r > best.0 {
                best = (r, i);
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Default)]
pub struct DedupReport {
    pub correlated_dropped: usize,
    pub constant_notices: Vec<String>,
}

/// Evaluates one operator application column-wise; `None` when any entry is
/// non-finite or beyond the magnitude cap.
fn transform_column(
    op: Operator,
    a: &[f64],
    b: Option<&[f64]>,
    cap: f64,
) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(a.len());
    match b {
        None => {
            for &x in a {
                let v = op.apply1(x);
                if !v.is_finite() || v.abs() > cap {
                    return None;
                }
                out.push(v);
            }
        }
        Some(b) => {
            for (&x, &y) in a.iter().zip(b) {
                let v = op.apply2(x, y);
                if !v.is_finite() || v.abs() > cap {
                    return None;
                }
                out.push(v);
            }
        }
    }
    Some(out)
}

struct Builder {
    descriptors: Vec<Descriptor>,
    columns: Vec<Vec<f64>>,
    origin: Vec<u32>,
    seen: HashSet<String>,
    ctx: UnitContext,
    n_rows: usize,
}

impl Builder {
    fn new(ctx: UnitContext, n_rows: usize) -> Builder {
        Builder {
            descriptors: Vec::new(),
            columns: Vec::new(),
            origin: Vec::new(),
            seen: HashSet::new(),
            ctx,
            n_rows,
        }
    }

    fn push(&mut self, d: Descriptor, col: Vec<f64>, origin: u32) {
        debug_assert_eq!(col.len(), self.n_rows);
        if self.seen.insert(d.canonical_string().to_string()) {
            self.descriptors.push(d);
            self.columns.push(col);
            self.origin.push(origin);
        }
    }

    fn finish(self) -> DescriptorSpace {
        DescriptorSpace {
            descriptors: self.descriptors,
            columns: self.columns,
            origin: self.origin,
            n_rows: self.n_rows,
            ctx: self.ctx,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{BINARY_OPS, UNARY_OPS};

    fn lognormal_dataset(p: usize, n: usize) -> Dataset {
        // Deterministic positive data with plenty of variation.
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                (0..n)
                    .map(|i| ((i * 7 + j * 13) % 17 + 1) as f64 * 0.37 + j as f64)
                    .collect()
            })
            .collect();
        let names = (0..p).map(|j| format!("f{}", j + 1)).collect();
        Dataset::from_columns(names, columns).unwrap()
    }

    fn no_dedup() -> GenOptions {
        GenOptions {
            dedup_threshold: None,
            ..GenOptions::default()
        }
    }

    #[test]
    fn unary_count_law() {
        let space = DescriptorSpace::from_dataset(&lognormal_dataset(5, 40));
        let (out, report) = space.generate_unary(&UNARY_OPS, &no_dedup()).unwrap();
        assert_eq!(out.len(), 45);
        assert_eq!(report.domain_dropped, 0);

        let two = DescriptorSpace::from_dataset(&lognormal_dataset(2, 40));
        let (out, _) = two.generate_unary(&UNARY_OPS, &no_dedup()).unwrap();
        assert_eq!(out.len(), 18);
    }

    #[test]
    fn binary_count_law() {
        let space = DescriptorSpace::from_dataset(&lognormal_dataset(5, 40));
        let (out, _) = space.generate_binary(&BINARY_OPS, &no_dedup()).unwrap();
        assert_eq!(out.len(), 55);

        let two = DescriptorSpace::from_dataset(&lognormal_dataset(2, 40));
        let (out, _) = two.generate_binary(&BINARY_OPS, &no_dedup()).unwrap();
        assert_eq!(out.len(), 7);
    }

    #[test]
    fn empty_ops_echo_input() {
        let space = DescriptorSpace::from_dataset(&lognormal_dataset(3, 20));
        let (out, _) = space.generate_unary(&[], &no_dedup()).unwrap();
        assert_eq!(out.len(), 3);
        let (out, _) = space
            .generate_binary(&[Operator::Identity], &no_dedup())
            .unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn generation_raises_complexity_by_one() {
        let space = DescriptorSpace::from_dataset(&lognormal_dataset(3, 20));
        let (unary, _) = space.generate_unary(&UNARY_OPS, &no_dedup()).unwrap();
        for i in 0..unary.len() {
            let c = unary.descriptor(i).complexity();
            assert!(c <= 1);
            if c == 1 {
                assert_eq!(unary.origin(i), 1);
            } else {
                assert_eq!(unary.origin(i), 0);
            }
        }
        let (binary, _) = unary.generate_binary(&BINARY_OPS, &no_dedup()).unwrap();
        for i in 0..binary.len() {
            assert!(binary.descriptor(i).complexity() <= 2);
        }
    }

    #[test]
    fn generation_errors() {
        let one = DescriptorSpace::from_dataset(&lognormal_dataset(1, 10));
        assert!(one.generate_binary(&BINARY_OPS, &no_dedup()).is_err());
        let empty = one.subset(&[]);
        assert!(empty.generate_unary(&UNARY_OPS, &no_dedup()).is_err());
    }

    #[test]
    fn domain_violations_are_dropped() {
        // Negative data: log and sqrt must be dropped, the rest survive.
        let data = Dataset::from_columns(
            vec!["a".into()],
            vec![vec![-1.0, -2.0, -0.5, -3.0]],
        )
        .unwrap();
        let space = DescriptorSpace::from_dataset(&data);
        let (out, report) = space.generate_unary(&UNARY_OPS, &no_dedup()).unwrap();
        assert_eq!(report.domain_dropped, 2);
        assert_eq!(out.len(), 7);
        assert!(out
            .descriptors()
            .iter()
            .all(|d| !d.canonical_string().starts_with("log")
                && !d.canonical_string().starts_with("sqrt")));
    }

    #[test]
    fn dedup_examples() {
        // x^2 and x*x collapse symbolically; x duplicated collapses too.
        let data = lognormal_dataset(2, 30);
        let space = DescriptorSpace::from_dataset(&data);
        let x = space.column(0).to_vec();
        let squared: Vec<f64> = x.iter().map(|v| v * v).collect();
        let with_dup = DescriptorSpace::from_parts(
            vec![
                Descriptor::parse("(x1^2)").unwrap(),
                Descriptor::parse("(x1*x1)").unwrap(),
                Descriptor::parse("x1").unwrap(),
                Descriptor::parse("x1").unwrap(),
            ],
            vec![squared.clone(), squared, x.clone(), x],
            vec![1, 1, 0, 0],
            UnitContext::Dimensionless,
            30,
        );
        // (x1*x1) canonicalizes to (x1^2): the builder already collapsed it.
        assert_eq!(with_dup.len(), 2);

        // Negation is perfectly correlated: one survivor.
        let neg: Vec<f64> = space.column(0).iter().map(|v| -v).collect();
        let pair = DescriptorSpace::from_parts(
            vec![
                Descriptor::parse("x1").unwrap(),
                Descriptor::parse("(x2-x1)").unwrap(),
            ],
            vec![space.column(0).to_vec(), neg],
            vec![0, 1],
            UnitContext::Dimensionless,
            30,
        );
        let (deduped, report) = pair.dedup(DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(deduped.len(), 1);
        assert_eq!(deduped.descriptor(0).canonical_string(), "x1");
        assert_eq!(report.correlated_dropped, 1);
    }

    #[test]
    fn dedup_removes_constants_and_is_idempotent() {
        let data = lognormal_dataset(2, 25);
        let space = DescriptorSpace::from_dataset(&data);
        let constant = DescriptorSpace::from_parts(
            vec![
                Descriptor::parse("x1").unwrap(),
                Descriptor::parse("(x1/x1)").unwrap(),
                Descriptor::parse("x2").unwrap(),
            ],
            vec![
                space.column(0).to_vec(),
                vec![1.0; 25],
                space.column(1).to_vec(),
            ],
            vec![0, 1, 0],
            UnitContext::Dimensionless,
            25,
        );
        let (once, report) = constant.dedup(DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(once.len(), 2);
        assert_eq!(report.constant_notices, vec!["(x1/x1)".to_string()]);
        let (twice, report2) = once.dedup(DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(twice.len(), once.len());
        assert_eq!(report2.correlated_dropped, 0);
        for (a, b) in once.descriptors().iter().zip(twice.descriptors()) {
            assert_eq!(a.canonical_string(), b.canonical_string());
        }
    }

    #[test]
    fn dedup_keeps_lowest_complexity() {
        // Same column under two names: the simpler descriptor survives even
        // though it was inserted later.
        let col = vec![1.0, 2.5, 3.0, 4.5, 5.0];
        let space = DescriptorSpace::from_parts(
            vec![
                Descriptor::parse("exp(log(x1))").unwrap(),
                Descriptor::parse("x1").unwrap(),
            ],
            vec![col.clone(), col],
            vec![1, 0],
            UnitContext::Dimensionless,
            5,
        );
        let (deduped, _) = space.dedup(DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(deduped.len(), 1);
        assert_eq!(deduped.descriptor(0).canonical_string(), "x1");
    }

    #[test]
    fn unit_filter_drops_violations() {
        use crate::units::UnitVec;
        let m = UnitVec::base("m").unwrap();
        let mut data = lognormal_dataset(2, 20);
        data.units = Some(vec![m, m]);
        let space = DescriptorSpace::from_dataset(&data);
        let opts = GenOptions {
            unit_filter: true,
            dedup_threshold: None,
            ..GenOptions::default()
        };
        let (out, report) = space.generate_unary(&UNARY_OPS, &opts).unwrap();
        // Per feature: x, inv, square, sqrt, abs stay; log, exp, sin, cos are
        // non-physical on a dimensioned argument.
        assert_eq!(out.len(), 10);
        assert_eq!(report.unit_dropped, 8);
        // size + size^2 rejected by the binary rule.
        let (bin, _) = space.generate_binary(&BINARY_OPS, &opts).unwrap();
        assert!(bin
            .descriptors()
            .iter()
            .all(|d| d.canonical_string() != "(x1+(x1^2))"));
        assert!(bin
            .descriptors()
            .iter()
            .any(|d| d.canonical_string() == "(x1-x2)"));
    }

    #[test]
    fn correlation_scan() {
        let data = lognormal_dataset(3, 40);
        let space = DescriptorSpace::from_dataset(&data);
        let y = space.column(1).to_vec();
        let (rho, idx) = space.correlation_with(&y).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        assert_eq!(idx, 1);

        // A constant response correlates with nothing.
        let flat = vec![2.0; 40];
        let (rho, _) = space.correlation_with(&flat).unwrap();
        assert_eq!(rho, 0.0);
    }
}
