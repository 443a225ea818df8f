//! Iterative descriptor construction and selection for linear models whose
//! predictors are engineered from primary variables through composed
//! algebraic operators.
//!
//! The pipeline alternates descriptor-space expansion with nonparametric
//! screening (a Bayesian additive regression trees sampler plus a
//! permutation-null threshold), then finishes with parametric selection
//! (cross-validated lasso, optionally exhaustive best-subset search under
//! AIC). A simulation harness reproduces the screening benchmarks and a
//! train/test RMSE protocol evaluates user-supplied datasets.

pub mod bart;
pub mod data;
pub mod descriptor;
pub mod error;
pub mod pan;
pub mod selectors;
pub mod sim;
pub mod space;
pub mod stats;
pub mod stream;
pub mod units;

pub use data::Dataset;
pub use descriptor::{Descriptor, Operator, UnitContext, BINARY_OPS, UNARY_OPS};
pub use error::{Error, Result};
pub use space::{DescriptorSpace, GenOptions, GenReport, DEFAULT_DEDUP_THRESHOLD};
