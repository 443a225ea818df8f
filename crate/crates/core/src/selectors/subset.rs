//! Exhaustive best-subset selection under AIC.
//!
//! Every size-k subset is fit by least squares (intercept always included)
//! and scored with AIC = n ln(RSS/n) + 2(k+1); the enumeration is
//! lexicographic, so AIC ties resolve to the lexicographically smallest
//! index set. A budget guards against combinatorial blowups.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Floor on RSS inside the log, so exact fits stay finite.
pub const RSS_FLOOR: f64 = 1e-12;
pub const DEFAULT_SUBSET_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetResult {
    /// Chosen predictor indices, ascending.
    pub subset: Vec<usize>,
    pub aic: f64,
    /// Least-squares coefficients: intercept first, then one per subset
    /// member in subset order.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    /// Subsets skipped because their normal equations were rank-deficient.
    pub skipped_rank_deficient: usize,
}

/// AIC for a size-k model on n observations.
pub fn aic(n: usize, rss: f64, k: usize) -> f64 {
    n as f64 * (rss.max(RSS_FLOOR) / n as f64).ln() + 2.0 * (k as f64 + 1.0)
}

pub fn choose(p: usize, k: usize) -> u128 {
    if k > p {
        return 0;
    }
    let k = k.min(p - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (p - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Least squares of y on [1 | X_S] via normal equations and Cholesky.
/// Returns (coefficients, rss) with the intercept first, or None when the
/// system is rank-deficient.
pub fn least_squares_fit(x: &[Vec<f64>], y: &[f64], subset: &[usize]) -> Option<(Vec<f64>, f64)> {
    let n = y.len();
    let k = subset.len();
    let m = k + 1;
    // Gram matrix of [1 | X_S] and right-hand side.
    let mut g = vec![0.0f64; m * m];
    let mut b = vec![0.0f64; m];
    g[0] = n as f64;
    b[0] = y.iter().sum();
    for (a, &ja) in subset.iter().enumerate() {
        let col = &x[ja];
        g[(a + 1) * m] = col.iter().sum();
        g[a + 1] = g[(a + 1) * m];
        b[a + 1] = col.iter().zip(y).map(|(u, v)| u * v).sum();
        for (c, &jc) in subset.iter().enumerate().take(a + 1) {
            let dot: f64 = col.iter().zip(&x[jc]).map(|(u, v)| u * v).sum();
            g[(a + 1) * m + (c + 1)] = dot;
            g[(c + 1) * m + (a + 1)] = dot;
        }
    }
    let coef = cholesky_solve(&mut g, &mut b, m)?;
    let mut rss = 0.0;
    for i in 0..n {
        let mut pred = coef[0];
        for (a, &j) in subset.iter().enumerate() {
            pred += coef[a + 1] * x[j][i];
        }
        let e = y[i] - pred;
        rss += e * e;
    }
    Some((coef, rss))
}

/// In-place Cholesky solve of G x = b; None when G is not (numerically)
/// positive definite.
fn cholesky_solve(g: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let scale = (0..m).map(|i| g[i * m + i]).fold(0.0f64, f64::max);
    let floor = scale.max(1.0) * 1e-12;
    for i in 0..m {
        for j in 0..=i {
            let mut sum = g[i * m + j];
            for t in 0..j {
                sum -= g[i * m + t] * g[j * m + t];
            }
            if i == j {
                if sum <= floor {
                    return None;
                }
                g[i * m + i] = sum.sqrt();
            } else {
                g[i * m + j] = sum / g[j * m + j];
            }
        }
    }
    // Forward then back substitution.
    for i in 0..m {
        let mut sum = b[i];
        for t in 0..i {
            sum -= g[i * m + t] * b[t];
        }
        b[i] = sum / g[i * m + i];
    }
    for i in (0..m).rev() {
        let mut sum = b[i];
        for t in (i + 1)..m {
            sum -= g[t * m + i] * b[t];
        }
        b[i] = sum / g[i * m + i];
    }
    Some(b.to_vec())
}

/// Exhaustive search over subsets of size exactly `k`.
pub fn l0_best_subset(x: &[Vec<f64>], y: &[f64], k: usize, budget: u128) -> Result<SubsetResult> {
    let p = x.len();
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations { n, min: 2 });
    }
    if k > p {
        return Err(Error::Invalid(format!("subset size {k} exceeds {p} predictors")));
    }
    let count = choose(p, k);
    if count > budget {
        return Err(Error::BudgetExceeded { p, k, count, budget });
    }

    let mut skipped = 0usize;
    let mut best: Option<SubsetResult> = None;
    let visit = |subset: &[usize], best: &mut Option<SubsetResult>, skipped: &mut usize| {
        match least_squares_fit(x, y, subset) {
            Some((coefficients, rss)) => {
                let score = aic(n, rss, k);
                let better = best.as_ref().is_none_or(|b| score < b.aic);
                if better {
                    *best = Some(SubsetResult {
                        subset: subset.to_vec(),
                        aic: score,
                        coefficients,
                        rss,
                        skipped_rank_deficient: 0,
                    });
                }
            }
            None => *skipped += 1,
        }
    };

    if k == 0 {
        visit(&[], &mut best, &mut skipped);
    } else {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            visit(&comb, &mut best, &mut skipped);
            // Lexicographic successor.
            let mut i = k;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if comb[i] != i + p - k {
                    comb[i] += 1;
                    for j in (i + 1)..k {
                        comb[j] = comb[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }

    let mut result = best.ok_or_else(|| {
        Error::Invalid(format!(
            "every size-{k} subset was rank-deficient ({skipped} skipped)"
        ))
    })?;
    result.skipped_rank_deficient = skipped;
    Ok(result)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSweep {
    /// Best subset per k = 1..=k_max, in order.
    pub per_k: Vec<SubsetResult>,
    /// Index into `per_k` of the global AIC winner (ties: smallest k).
    pub best_index: usize,
}

impl KSweep {
    pub fn best(&self) -> &SubsetResult {
        &self.per_k[self.best_index]
    }
}

/// Runs `l0_best_subset` for each k in 1..=k_max (clamped to the number of
/// predictors) and reports the global AIC winner.
pub fn select_k_sweep(x: &[Vec<f64>], y: &[f64], k_max: usize, budget: u128) -> Result<KSweep> {
    if k_max == 0 {
        return Err(Error::Invalid("k_max must be at least 1".into()));
    }
    let k_hi = k_max.min(x.len());
    let mut per_k = Vec::with_capacity(k_hi);
    for k in 1..=k_hi {
        per_k.push(l0_best_subset(x, y, k, budget)?);
    }
    if per_k.is_empty() {
        return Err(Error::EmptyInput("no predictors for subset sweep"));
    }
    let best_index = per_k
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.aic.partial_cmp(&b.1.aic).unwrap())
        .unwrap()
        .0;
    Ok(KSweep { per_k, best_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{rng_for, Domain};
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_matrix(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_for(seed, Domain::Features, 0);
        (0..p)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn choose_counts() {
        assert_eq!(choose(5, 2), 10);
        assert_eq!(choose(45, 4), 148_995);
        assert_eq!(choose(3, 0), 1);
        assert_eq!(choose(2, 5), 0);
    }

    #[test]
    fn intercept_only_model() {
        let x = gaussian_matrix(40, 3, 1);
        let y: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let r = l0_best_subset(&x, &y, 0, DEFAULT_SUBSET_BUDGET).unwrap();
        assert!(r.subset.is_empty());
        let n = 40.0;
        let mean = y.iter().sum::<f64>() / n;
        let var_mle = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((r.aic - (n * var_mle.ln() + 2.0)).abs() < 1e-9);
        assert!((r.coefficients[0] - mean).abs() < 1e-9);
    }

    #[test]
    fn exact_fit_hits_rss_floor() {
        let x = gaussian_matrix(25, 3, 2);
        let y = x[1].clone();
        let r = l0_best_subset(&x, &y, 1, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(r.subset, vec![1]);
        assert!(r.rss < 1e-18);
        assert!(r.aic.is_finite());
        assert!((r.coefficients[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn budget_is_enforced() {
        let x = gaussian_matrix(10, 30, 3);
        let y = x[0].clone();
        let err = l0_best_subset(&x, &y, 15, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn rank_deficient_subsets_are_skipped() {
        let mut x = gaussian_matrix(30, 3, 4);
        x.push(x[0].clone()); // duplicate column
        let y: Vec<f64> = (0..30)
            .map(|i| 2.0 * x[1][i] + 0.1 * (i as f64).sin())
            .collect();
        let r = l0_best_subset(&x, &y, 2, DEFAULT_SUBSET_BUDGET).unwrap();
        // {0, 3} is singular and must be skipped without derailing the search.
        assert_eq!(r.skipped_rank_deficient, 1);
        assert!(r.subset.contains(&1));
    }

    #[test]
    fn sweep_prefers_true_size() {
        let x = gaussian_matrix(120, 6, 5);
        let mut nrng = rng_for(5, Domain::Noise, 0);
        let y: Vec<f64> = (0..120)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                3.0 * x[1][i] - 2.0 * x[4][i] + 0.5 * e
            })
            .collect();
        let sweep = select_k_sweep(&x, &y, 4, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(sweep.per_k.len(), 4);
        assert_eq!(sweep.best().subset, vec![1, 4]);
    }

    #[test]
    fn k_max_one_is_a_single_sweep() {
        let x = gaussian_matrix(30, 3, 6);
        let y = x[2].clone();
        let sweep = select_k_sweep(&x, &y, 1, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(sweep.per_k.len(), 1);
        assert_eq!(sweep.best().subset, vec![2]);
    }
}
