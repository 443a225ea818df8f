//! Property tests for the descriptor algebra: canonical-form round-trips,
//! the entry-wise evaluation law against a scalar oracle, and metric
//! identities over arbitrary count triples.

use ibart_core::descriptor::{Descriptor, Expr, Operator, UnitContext};
use ibart_core::sim::metrics_from_counts;
use proptest::prelude::*;
use std::sync::Arc;

fn leaf_strategy() -> impl Strategy<Value = Expr> {
    (0usize..5).prop_map(Expr::Leaf)
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    leaf_strategy().prop_recursive(4, 64, 8, |inner| {
        prop_oneof![
            (
                prop_oneof![
                    Just(Operator::Reciprocal),
                    Just(Operator::Square),
                    Just(Operator::Sqrt),
                    Just(Operator::Log),
                    Just(Operator::Exp),
                    Just(Operator::Abs),
                    Just(Operator::SinPi),
                    Just(Operator::CosPi),
                ],
                inner.clone()
            )
                .prop_map(|(op, e)| Expr::Unary(op, Arc::new(e))),
            (
                prop_oneof![
                    Just(Operator::Add),
                    Just(Operator::Subtract),
                    Just(Operator::Multiply),
                    Just(Operator::Divide),
                    Just(Operator::AbsDiff),
                ],
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::Binary(op, Arc::new(a), Arc::new(b))),
        ]
    })
}

/// Independent scalar interpreter used as the evaluation oracle.
fn scalar_eval(expr: &Expr, row: &[f64]) -> f64 {
    match expr {
        Expr::Leaf(i) => row[*i],
        Expr::Unary(op, e) => {
            let v = scalar_eval(e, row);
            match op {
                Operator::Reciprocal => 1.0 / v,
                Operator::Square => v * v,
                Operator::Sqrt => v.sqrt(),
                Operator::Log => v.ln(),
                Operator::Exp => v.exp(),
                Operator::Abs => v.abs(),
                Operator::SinPi => (std::f64::consts::PI * v).sin(),
                Operator::CosPi => (std::f64::consts::PI * v).cos(),
                _ => unreachable!(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (x, y) = (scalar_eval(a, row), scalar_eval(b, row));
            match op {
                Operator::Add => x + y,
                Operator::Subtract => x - y,
                Operator::Multiply => x * y,
                Operator::Divide => x / y,
                Operator::AbsDiff => (x - y).abs(),
                _ => unreachable!(),
            }
        }
    }
}

proptest! {
    /// parse(canonical_string(d)) reproduces the canonical string exactly.
    #[test]
    fn canonical_string_round_trips(expr in expr_strategy()) {
        let d = Descriptor::from_expr(&expr, &UnitContext::Dimensionless);
        let reparsed = Descriptor::parse(d.canonical_string()).unwrap();
        prop_assert_eq!(d.canonical_string(), reparsed.canonical_string());
        prop_assert_eq!(d.complexity(), reparsed.complexity());
    }

    /// Canonicalization is idempotent and preserves pointwise values.
    #[test]
    fn canonicalization_preserves_values(
        expr in expr_strategy(),
        rows in prop::collection::vec(
            prop::collection::vec(0.2f64..3.0, 5),
            1..6
        ),
    ) {
        let d = Descriptor::from_expr(&expr, &UnitContext::Dimensionless);
        for row in &rows {
            let raw = scalar_eval(&expr, row);
            let canon = scalar_eval(d.root(), row);
            if raw.is_finite() && canon.is_finite() {
                let tol = 1e-9 * (1.0 + raw.abs());
                prop_assert!((raw - canon).abs() <= tol,
                    "raw {} vs canonical {} for {}", raw, canon, d.canonical_string());
            }
        }
    }

    /// Matrix evaluation equals the scalar oracle applied row by row.
    #[test]
    fn evaluation_is_entrywise(
        expr in expr_strategy(),
        rows in prop::collection::vec(
            prop::collection::vec(0.2f64..3.0, 5),
            2..8
        ),
    ) {
        let d = Descriptor::from_expr(&expr, &UnitContext::Dimensionless);
        let columns: Vec<Vec<f64>> = (0..5)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        match d.evaluate(&columns, 1e8) {
            Ok(values) => {
                for (i, row) in rows.iter().enumerate() {
                    let expect = scalar_eval(d.root(), row);
                    prop_assert!(expect.is_finite());
                    let tol = 1e-9 * (1.0 + expect.abs());
                    prop_assert!((values[i] - expect).abs() <= tol);
                }
            }
            Err(_) => {
                // Rejection must be justified by some non-finite or oversized
                // entry of the canonical tree.
                let any_bad = rows.iter().any(|row| {
                    let v = scalar_eval(d.root(), row);
                    !v.is_finite() || v.abs() > 1e8
                });
                prop_assert!(any_bad, "rejected {} with no offending row", d.canonical_string());
            }
        }
    }

    /// Precision, recall, and F1 identities hold for every count triple,
    /// including empty denominators.
    #[test]
    fn metric_identities(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        let m = metrics_from_counts(tp, fp, fn_);
        if tp + fp == 0 {
            prop_assert_eq!(m.precision, 0.0);
        } else {
            prop_assert!((m.precision - tp as f64 / (tp + fp) as f64).abs() < 1e-12);
        }
        if tp + fn_ == 0 {
            prop_assert_eq!(m.recall, 0.0);
        } else {
            prop_assert!((m.recall - tp as f64 / (tp + fn_) as f64).abs() < 1e-12);
        }
        if tp == 0 {
            prop_assert_eq!(m.f1, 0.0);
        } else {
            let expect = 2.0 * m.precision * m.recall / (m.precision + m.recall);
            prop_assert!((m.f1 - expect).abs() < 1e-12);
        }
        prop_assert!(m.f1 >= 0.0 && m.f1 <= 1.0);
    }
}
