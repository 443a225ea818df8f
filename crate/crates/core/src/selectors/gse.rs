//! Permutation-threshold screening on inclusion proportions.
//!
//! The observed fit yields inclusion proportions q. B fits against permuted
//! responses yield null draws q*_{i,b} with per-variable mean m_i and SD s_i.
//! Variable i is selected when q_i > m_i + C* s_i, where C* is the smallest
//! global multiplier under which, for every variable, strictly more than
//! (1-alpha)B of the null draws fall at or below its threshold.

use crate::bart::{bart_fit, BartConfig};
use crate::error::{Error, Result};
use crate::stream::{child_seed, rng_for, Domain};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GseResult {
    /// Indices with q_i > m_i + C* s_i.
    pub selected: Vec<usize>,
    /// Observed inclusion proportions.
    pub q: Vec<f64>,
    /// Permutation-null means.
    pub perm_mean: Vec<f64>,
    /// Permutation-null standard deviations (sample, B-1 denominator).
    pub perm_sd: Vec<f64>,
    /// The global standard-error multiplier C*.
    pub multiplier: f64,
    /// False when no finite multiplier achieves the coverage (then nothing
    /// is selected).
    pub attainable: bool,
    pub permutations: usize,
    pub alpha: f64,
    /// The observed fit never split (degenerate screen).
    pub observed_no_split: bool,
}

/// Threshold computation alone, given observed q and null draws (one inner
/// vector per permutation). Exposed separately so it can be checked against
/// brute-force refinement.
pub fn gse_threshold(q: &[f64], perm_q: &[Vec<f64>], alpha: f64) -> Result<GseResult> {
    let b_count = perm_q.len();
    if b_count < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 permutations, got {b_count}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha {alpha} outside (0,1)")));
    }
    let p = q.len();
    for draw in perm_q {
        if draw.len() != p {
            return Err(Error::Invalid(
                "permutation draw length does not match q".into(),
            ));
        }
    }

    let bf = b_count as f64;
    let mut perm_mean = vec![0.0; p];
    let mut perm_sd = vec![0.0; p];
    for i in 0..p {
        let mut m = 0.0;
        for draw in perm_q {
            m += draw[i];
        }
        m /= bf;
        let mut ss = 0.0;
        for draw in perm_q {
            ss += (draw[i] - m) * (draw[i] - m);
        }
        perm_mean[i] = m;
        perm_sd[i] = (ss / (bf - 1.0)).sqrt();
    }

    // Coverage demands count > (1-alpha)B, i.e. count >= t.
    let t = ((1.0 - alpha) * bf).floor() as usize + 1;
    let (multiplier, attainable) = if t > b_count {
        (f64::INFINITY, false)
    } else {
        // Per variable, the smallest C making its coverage hold is the t-th
        // smallest standardized null draw; the global C* is their maximum
        // (variables with zero SD always satisfy coverage).
        let mut c_star = 0.0f64;
        let mut scratch = Vec::with_capacity(b_count);
        for i in 0..p {
            if perm_sd[i] == 0.0 {
                continue;
            }
            scratch.clear();
            for draw in perm_q {
                scratch.push((draw[i] - perm_mean[i]) / perm_sd[i]);
            }
            scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c_star = c_star.max(scratch[t - 1]);
        }
        (c_star.max(0.0), true)
    };

    let selected = if attainable {
        (0..p)
            .filter(|&i| q[i] > perm_mean[i] + multiplier * perm_sd[i])
            .collect()
    } else {
        Vec::new()
    };

    Ok(GseResult {
        selected,
        q: q.to_vec(),
        perm_mean,
        perm_sd,
        multiplier,
        attainable,
        permutations: b_count,
        alpha,
        observed_no_split: false,
    })
}

/// Full screening pass: observed fit, B permutation fits, threshold, selection.
///
/// Permutation b shuffles the response with its own named stream and fits
/// with a seed derived from (cfg.seed, b), so the B fits may run concurrently
/// without affecting results.
pub fn gse_select(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &BartConfig,
    permutations: usize,
    alpha: f64,
) -> Result<GseResult> {
    if permutations < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 permutations, got {permutations}"
        )));
    }
    let observed = bart_fit(x, y, cfg)?;

    let perm_q: Vec<Vec<f64>> = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let seed_b = child_seed(cfg.seed, Domain::Permutation, b as u64);
            let mut rng = rng_for(seed_b, Domain::Permutation, 0);
            let mut y_perm = y.to_vec();
            y_perm.shuffle(&mut rng);
            let cfg_b = cfg.clone().with_seed(seed_b);
            bart_fit(x, &y_perm, &cfg_b).map(|fit| fit.inclusion.q)
        })
        .collect::<Result<_>>()?;

    let mut result = gse_threshold(&observed.inclusion.q, &perm_q, alpha)?;
    result.observed_no_split = observed.inclusion.no_split;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{rng_for, Domain};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Grid-refinement brute force: scan C upward until coverage holds for
    /// every variable, then refine the bracket.
    pub(crate) fn brute_force_multiplier(perm_q: &[Vec<f64>], alpha: f64) -> f64 {
        let b = perm_q.len();
        let p = perm_q[0].len();
        let bf = b as f64;
        let mean: Vec<f64> = (0..p)
            .map(|i| perm_q.iter().map(|d| d[i]).sum::<f64>() / bf)
            .collect();
        let sd: Vec<f64> = (0..p)
            .map(|i| {
                let ss: f64 = perm_q.iter().map(|d| (d[i] - mean[i]).powi(2)).sum();
                (ss / (bf - 1.0)).sqrt()
            })
            .collect();
        let covered = |c: f64| {
            (0..p).all(|i| {
                let count = perm_q
                    .iter()
                    .filter(|d| d[i] <= mean[i] + c * sd[i])
                    .count() as f64;
                count / bf > 1.0 - alpha
            })
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while !covered(hi) {
            lo = hi;
            hi *= 2.0;
            assert!(hi < 1e9, "no finite multiplier");
        }
        if covered(lo) {
            return 0.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if covered(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn hand_computed_example() {
        // B = 4, p = 1, null draws {0.1, 0.2, 0.3, 0.4}, observed q = 0.5.
        let perm = vec![vec![0.1], vec![0.2], vec![0.3], vec![0.4]];
        let r = gse_threshold(&[0.5], &perm, 0.05).unwrap();
        assert!((r.perm_mean[0] - 0.25).abs() < 1e-12);
        assert!((r.perm_sd[0] - 0.1290994).abs() < 1e-6);
        assert!((r.multiplier - 1.1618950).abs() < 1e-6);
        assert_eq!(r.selected, vec![0]);
        // Threshold sits at 0.4; anything at or below it is not selected.
        let r = gse_threshold(&[0.4], &perm, 0.05).unwrap();
        assert!(r.selected.is_empty());
    }

    #[test]
    fn identical_nulls_select_nothing() {
        // Every permutation reproduces the observed q exactly: s_i = 0 and
        // the strict inequality never fires.
        let q = vec![0.6, 0.4];
        let perm = vec![q.clone(), q.clone(), q.clone()];
        let r = gse_threshold(&q, &perm, 0.05).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.multiplier, 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = rng_for(2024, Domain::Replicate, 0);
        for _ in 0..20 {
            let p = rng.random_range(2..8);
            let b = rng.random_range(4..30);
            let perm: Vec<Vec<f64>> = (0..b)
                .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
                .collect();
            let q: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
            let r = gse_threshold(&q, &perm, 0.05).unwrap();
            let brute = brute_force_multiplier(&perm, 0.05);
            assert!(
                (r.multiplier - brute).abs() < 1e-9,
                "exact {} vs brute {}",
                r.multiplier,
                brute
            );
            // Selected sets agree under either multiplier.
            let sel_brute: Vec<usize> = (0..p)
                .filter(|&i| q[i] > r.perm_mean[i] + brute * r.perm_sd[i])
                .collect();
            assert_eq!(r.selected, sel_brute);
        }
    }

    #[test]
    fn enlarging_c_never_grows_selection() {
        let mut rng = rng_for(7, Domain::Replicate, 1);
        let p = 6;
        let perm: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
            .collect();
        let q: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
        let r = gse_threshold(&q, &perm, 0.1).unwrap();
        let select_at = |c: f64| -> Vec<usize> {
            (0..p)
                .filter(|&i| q[i] > r.perm_mean[i] + c * r.perm_sd[i])
                .collect()
        };
        let mut prev = select_at(0.0);
        for step in 1..40 {
            let cur = select_at(step as f64 * 0.25);
            assert!(cur.iter().all(|i| prev.contains(i)));
            prev = cur;
        }
    }

    #[test]
    fn screening_finds_a_strong_signal() {
        let mut frng = rng_for(31, Domain::Features, 0);
        let n = 100;
        let x: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut frng)).collect())
            .collect();
        let mut nrng = rng_for(31, Domain::Noise, 0);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                12.0 * x[0][i] + e
            })
            .collect();
        let cfg = BartConfig {
            n_burn: 250,
            n_keep: 250,
            seed: 8,
            ..BartConfig::default()
        };
        let r = gse_select(&x, &y, &cfg, 8, 0.05).unwrap();
        assert!(r.selected.contains(&0), "selected {:?}", r.selected);
        assert!(r.attainable);
        assert!(r.multiplier >= 0.0);
    }

    #[test]
    fn rejects_tiny_b() {
        let r = gse_threshold(&[0.5], &[vec![0.1]], 0.05);
        assert!(r.is_err());
    }
}
