//! The three selection primitives: permutation-threshold screening on
//! BART inclusion proportions, cross-validated lasso, and exhaustive
//! best-subset search under AIC.

pub mod gse;
pub mod lasso;
pub mod subset;

pub use gse::{gse_select, gse_threshold, GseResult};
pub use lasso::{kkt_violation, lasso_cv, lasso_cv_rule, CvRule, LassoResult};
pub use subset::{
    aic, choose, l0_best_subset, select_k_sweep, KSweep, SubsetResult, DEFAULT_SUBSET_BUDGET,
};
