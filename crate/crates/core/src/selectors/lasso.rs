//! L1-penalized least squares by cyclic coordinate descent over a log-spaced
//! penalty path, with k-fold cross-validation to choose the penalty.
//!
//! Objective (standardized predictors z_j, centered response):
//!     (1/2n) ||y - Z b||^2 + lambda ||b||_1
//! so the coordinate update is a soft threshold of the partial residual
//! correlation. Predictors are standardized internally and coefficients are
//! returned on the original scale.

use crate::error::{Error, Result};
use crate::stream::{rng_for, Domain};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

const PATH_LEN: usize = 100;
const PATH_RATIO: f64 = 1e-3;
const CD_TOL: f64 = 1e-11;
const CD_MAX_SWEEPS: usize = 100_000;

/// How the cross-validated penalty is chosen from the error curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvRule {
    /// The penalty minimizing mean CV error.
    MinError,
    /// The largest penalty within one standard error of the minimum — the
    /// reference default; the flat-bottomed error curves of collinear
    /// descriptor spaces make the plain minimum keep handfuls of
    /// noise-level coefficients.
    OneStandardError,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoResult {
    pub lambda_path: Vec<f64>,
    /// Mean cross-validated squared error per path point.
    pub cv_errors: Vec<f64>,
    /// Standard error of the CV mean per path point (across folds).
    pub cv_se: Vec<f64>,
    pub chosen_lambda: f64,
    pub chosen_index: usize,
    pub intercept: f64,
    /// Coefficients on the original predictor scale.
    pub coefficients: Vec<f64>,
    /// Indices of nonzero coefficients at the chosen penalty.
    pub selected: Vec<usize>,
}

struct Standardized {
    z: Vec<Vec<f64>>,
    mean: Vec<f64>,
    scale: Vec<f64>,
    y_centered: Vec<f64>,
    y_mean: f64,
}

fn standardize(x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> Standardized {
    let n = rows.len() as f64;
    let p = x.len();
    let mut mean = vec![0.0; p];
    let mut scale = vec![0.0; p];
    let mut z = Vec::with_capacity(p);
    for j in 0..p {
        let col = &x[j];
        let m = rows.iter().map(|&i| col[i]).sum::<f64>() / n;
        let var = rows.iter().map(|&i| (col[i] - m) * (col[i] - m)).sum::<f64>() / n;
        let s = if var > 0.0 { var.sqrt() } else { 1.0 };
        mean[j] = m;
        scale[j] = s;
        z.push(rows.iter().map(|&i| (col[i] - m) / s).collect());
    }
    let y_mean = rows.iter().map(|&i| y[i]).sum::<f64>() / n;
    let y_centered = rows.iter().map(|&i| y[i] - y_mean).collect();
    Standardized {
        z,
        mean,
        scale,
        y_centered,
        y_mean,
    }
}

/// Cyclic coordinate descent at one penalty, warm-started from `beta`.
/// `residual` must equal y_centered - Z beta on entry and is kept in sync.
fn descend(z: &[Vec<f64>], beta: &mut [f64], residual: &mut [f64], lambda: f64) {
    let n = residual.len() as f64;
    let p = z.len();
    let mut active: Vec<usize> = Vec::with_capacity(p);
    for _ in 0..CD_MAX_SWEEPS {
        // Full sweep over all coordinates.
        let mut max_delta = 0.0f64;
        active.clear();
        for j in 0..p {
            let delta = update_coord(z, beta, residual, lambda, j, n);
            max_delta = max_delta.max(delta.abs());
            if beta[j] != 0.0 {
                active.push(j);
            }
        }
        if max_delta < CD_TOL {
            return;
        }
        // Inner sweeps on the active set until stable.
        for _ in 0..CD_MAX_SWEEPS {
            let mut inner_max = 0.0f64;
            for &j in &active {
                let delta = update_coord(z, beta, residual, lambda, j, n);
                inner_max = inner_max.max(delta.abs());
            }
            if inner_max < CD_TOL {
                break;
            }
        }
    }
}

#[inline]
fn update_coord(
    z: &[Vec<f64>],
    beta: &mut [f64],
    residual: &mut [f64],
    lambda: f64,
    j: usize,
    n: f64,
) -> f64 {
    let zj = &z[j];
    let mut rho = 0.0;
    for (zi, ri) in zj.iter().zip(residual.iter()) {
        rho += zi * ri;
    }
    // Unit-variance columns make the quadratic coefficient exactly 1.
    let u = rho / n + beta[j];
    let new = soft_threshold(u, lambda);
    let delta = new - beta[j];
    if delta != 0.0 {
        for (zi, ri) in zj.iter().zip(residual.iter_mut()) {
            *ri -= delta * zi;
        }
        beta[j] = new;
    }
    delta
}

#[inline]
fn soft_threshold(u: f64, lambda: f64) -> f64 {
    if u > lambda {
        u - lambda
    } else if u < -lambda {
        u + lambda
    } else {
        0.0
    }
}

fn lambda_max(z: &[Vec<f64>], y_centered: &[f64]) -> f64 {
    let n = y_centered.len() as f64;
    z.iter()
        .map(|col| {
            col.iter()
                .zip(y_centered)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
                / n
        })
        .fold(0.0, f64::max)
}

fn path_from(lmax: f64) -> Vec<f64> {
    (0..PATH_LEN)
        .map(|k| lmax * PATH_RATIO.powf(k as f64 / (PATH_LEN - 1) as f64))
        .collect()
}

/// Cross-validated fit with the one-standard-error penalty rule.
pub fn lasso_cv(x: &[Vec<f64>], y: &[f64], folds: usize, seed: u64) -> Result<LassoResult> {
    lasso_cv_rule(x, y, folds, seed, CvRule::OneStandardError)
}

/// Fits the penalty path with k-fold cross-validation, chooses the penalty
/// by the given rule, and refits on the full data.
pub fn lasso_cv_rule(
    x: &[Vec<f64>],
    y: &[f64],
    folds: usize,
    seed: u64,
    rule: CvRule,
) -> Result<LassoResult> {
    let n = y.len();
    let p = x.len();
    if p == 0 {
        return Err(Error::EmptyInput("lasso over an empty predictor set"));
    }
    if folds < 2 {
        return Err(Error::Invalid(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::TooFewObservations { n, min: folds });
    }
    for col in x {
        if col.len() != n {
            return Err(Error::Invalid("predictor column length mismatch".into()));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predictor matrix"));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }

    let all_rows: Vec<usize> = (0..n).collect();
    let full = standardize(x, y, &all_rows);
    let lmax = lambda_max(&full.z, &full.y_centered);
    if lmax < 1e-12 {
        // Centered response is (numerically) orthogonal to every predictor:
        // the all-zero solution is optimal for any positive penalty.
        return Ok(LassoResult {
            lambda_path: vec![0.0],
            cv_errors: vec![full.y_centered.iter().map(|v| v * v).sum::<f64>() / n as f64],
            cv_se: vec![0.0],
            chosen_lambda: 0.0,
            chosen_index: 0,
            intercept: full.y_mean,
            coefficients: vec![0.0; p],
            selected: Vec::new(),
        });
    }
    let path = path_from(lmax);

    // Fold assignment: shuffled indices chopped into balanced chunks.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(seed, Domain::Fold, 0);
    order.shuffle(&mut rng);
    let mut sq_err = vec![0.0f64; path.len()];
    let mut fold_mse = vec![vec![0.0f64; path.len()]; folds];
    for f in 0..folds {
        let lo = f * n / folds;
        let hi = (f + 1) * n / folds;
        let test: &[usize] = &order[lo..hi];
        let train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
        let std_train = standardize(x, y, &train);
        let mut beta = vec![0.0; p];
        let mut residual = std_train.y_centered.clone();
        for (k, &lambda) in path.iter().enumerate() {
            descend(&std_train.z, &mut beta, &mut residual, lambda);
            let mut fold_err = 0.0;
            for &i in test {
                let mut pred = std_train.y_mean;
                for j in 0..p {
                    if beta[j] != 0.0 {
                        pred += beta[j] * (x[j][i] - std_train.mean[j]) / std_train.scale[j];
                    }
                }
                fold_err += (pred - y[i]) * (pred - y[i]);
            }
            sq_err[k] += fold_err;
            fold_mse[f][k] = fold_err / test.len() as f64;
        }
    }
    let cv_errors: Vec<f64> = sq_err.into_iter().map(|s| s / n as f64).collect();
    let cv_se: Vec<f64> = (0..path.len())
        .map(|k| {
            let per_fold: Vec<f64> = fold_mse.iter().map(|row| row[k]).collect();
            crate::stats::sample_sd(&per_fold) / (folds as f64).sqrt()
        })
        .collect();
    let min_index = cv_errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let chosen_index = match rule {
        CvRule::MinError => min_index,
        CvRule::OneStandardError => {
            let bar = cv_errors[min_index] + cv_se[min_index];
            (0..=min_index)
                .find(|&k| cv_errors[k] <= bar)
                .unwrap_or(min_index)
        }
    };
    let chosen_lambda = path[chosen_index];

    // Final fit on the full data, warm-started down the path.
    let mut beta = vec![0.0; p];
    let mut residual = full.y_centered.clone();
    for &lambda in &path[..=chosen_index] {
        descend(&full.z, &mut beta, &mut residual, lambda);
    }

    let mut coefficients = vec![0.0; p];
    let mut intercept = full.y_mean;
    let mut selected = Vec::new();
    for j in 0..p {
        if beta[j] != 0.0 {
            coefficients[j] = beta[j] / full.scale[j];
            intercept -= coefficients[j] * full.mean[j];
            selected.push(j);
        }
    }

    Ok(LassoResult {
        lambda_path: path,
        cv_errors,
        cv_se,
        chosen_lambda,
        chosen_index,
        intercept,
        coefficients,
        selected,
    })
}

/// Maximum violation of the subgradient optimality conditions at the result's
/// chosen penalty, in the standardized problem: zero coefficients need
/// |z_j . r / n| <= lambda, nonzero ones need z_j . r / n = lambda sign(b_j).
pub fn kkt_violation(x: &[Vec<f64>], y: &[f64], result: &LassoResult) -> f64 {
    let all_rows: Vec<usize> = (0..y.len()).collect();
    let full = standardize(x, y, &all_rows);
    let n = y.len() as f64;
    let beta_std: Vec<f64> = (0..x.len())
        .map(|j| result.coefficients[j] * full.scale[j])
        .collect();
    let mut residual = full.y_centered.clone();
    for (b, zj) in beta_std.iter().zip(&full.z) {
        if *b != 0.0 {
            for (ri, zi) in residual.iter_mut().zip(zj) {
                *ri -= b * zi;
            }
        }
    }
    let lambda = result.chosen_lambda;
    let mut worst = 0.0f64;
    for (b, zj) in beta_std.iter().zip(&full.z) {
        let g: f64 = zj.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>() / n;
        let violation = if *b == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * b.signum()).abs()
        };
        worst = worst.max(violation);
    }
    worst
}
