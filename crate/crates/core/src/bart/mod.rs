//! Bayesian additive regression trees, fit for variable screening.
//!
//! The model is a sum of small regression trees with a depth prior
//! alpha*(1+d)^-beta on node splitting, a N(0, sigma_mu^2) leaf prior with
//! sigma_mu = 0.5/(k*sqrt(m)) after scaling the response to [-0.5, 0.5], and
//! a scaled-inverse-chi-square noise prior nu*lambda/chisq_nu with lambda
//! chosen so the prior puts probability `sigma_quantile` on sigma below the
//! sample SD of the response. Prediction is not the point here: the fit
//! exposes per-variable split-rule inclusion proportions for screening.

mod sampler;
mod tree;

use crate::error::{Error, Result};
use crate::stats;
use crate::stream::{rng_for, Domain};
use sampler::Sampler;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BartConfig {
    /// Ensemble size m.
    pub n_trees: usize,
    /// Burn-in sweeps discarded before collection.
    pub n_burn: usize,
    /// Posterior sweeps kept.
    pub n_keep: usize,
    /// Depth-prior base, in (0,1).
    pub depth_alpha: f64,
    /// Depth-prior power, > 0.
    pub depth_beta: f64,
    /// Leaf-shrinkage k in sigma_mu = 0.5/(k*sqrt(m)).
    pub leaf_k: f64,
    /// Noise-prior degrees of freedom.
    pub nu: f64,
    /// Prior probability that sigma is below the sample SD of the response.
    pub sigma_quantile: f64,
    pub seed: u64,
    /// Keep the per-draw split-rule count matrix (for debug CSV dumps).
    pub record_draw_counts: bool,
    /// Tally node depths only every this-many kept draws (diagnostics).
    pub tally_thin: usize,
    /// Diagnostic hook: hold sigma^2 fixed instead of sampling it.
    pub fixed_sigma2: Option<f64>,
    /// Diagnostic hook: keep all trees as zero-valued stumps.
    pub freeze_trees: bool,
}

impl Default for BartConfig {
    fn default() -> Self {
        BartConfig {
            n_trees: 20,
            n_burn: 10_000,
            n_keep: 5_000,
            depth_alpha: 0.95,
            depth_beta: 2.0,
            leaf_k: 2.0,
            nu: 3.0,
            sigma_quantile: 0.9,
            seed: 0,
            record_draw_counts: false,
            tally_thin: 1,
            fixed_sigma2: None,
            freeze_trees: false,
        }
    }
}

impl BartConfig {
    /// Reduced profile for laptop-scale runs.
    pub fn desk() -> Self {
        BartConfig {
            n_burn: 1_000,
            n_keep: 1_000,
            ..BartConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.n_keep == 0 || self.tally_thin == 0 {
            return Err(Error::Invalid("tree/draw counts must be positive".into()));
        }
        if !(self.depth_alpha > 0.0 && self.depth_alpha < 1.0) {
            return Err(Error::Invalid(format!(
                "depth_alpha {} outside (0,1)",
                self.depth_alpha
            )));
        }
        if self.depth_beta <= 0.0 || self.leaf_k <= 0.0 || self.nu <= 0.0 {
            return Err(Error::Invalid(
                "depth_beta, leaf_k, nu must be positive".into(),
            ));
        }
        if !(self.sigma_quantile > 0.0 && self.sigma_quantile < 1.0) {
            return Err(Error::Invalid(format!(
                "sigma_quantile {} outside (0,1)",
                self.sigma_quantile
            )));
        }
        Ok(())
    }
}

/// Per-variable inclusion proportions: the posterior-average fraction of all
/// split rules in the ensemble that use each variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionSummary {
    pub q: Vec<f64>,
    /// True when every kept draw contained zero splits.
    pub no_split: bool,
    /// Kept draws with at least one split.
    pub contributing_draws: usize,
}

/// Averages per-draw split fractions over draws that contain at least one
/// split; draws with zero splits contribute nothing.
pub fn inclusion_from_counts(counts_per_draw: &[Vec<u32>], p: usize) -> InclusionSummary {
    let mut q = vec![0.0; p];
    let mut contributing = 0usize;
    for counts in counts_per_draw {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            continue;
        }
        contributing += 1;
        for (qi, &c) in q.iter_mut().zip(counts) {
            *qi += c as f64 / total as f64;
        }
    }
    if contributing == 0 {
        return InclusionSummary {
            q: vec![0.0; p],
            no_split: true,
            contributing_draws: 0,
        };
    }
    for qi in q.iter_mut() {
        *qi /= contributing as f64;
    }
    InclusionSummary {
        q,
        no_split: false,
        contributing_draws: contributing,
    }
}

/// Sample variance of the residuals from ridge-stabilized least squares of
/// `y` on `[1 | X]`; `None` when the system is not comfortably overdetermined.
fn ols_residual_var(x: &[Vec<f64>], y: &[f64]) -> Option<f64> {
    let n = y.len();
    let p = x.len();
    if n < p + 10 {
        return None;
    }
    let m = p + 1;
    let mut g = vec![0.0f64; m * m];
    let mut b = vec![0.0f64; m];
    g[0] = n as f64;
    b[0] = y.iter().sum();
    for (a, col) in x.iter().enumerate() {
        let s: f64 = col.iter().sum();
        g[(a + 1) * m] = s;
        g[a + 1] = s;
        b[a + 1] = col.iter().zip(y).map(|(u, v)| u * v).sum();
        for (c, other) in x.iter().enumerate().take(a + 1) {
            let dot: f64 = col.iter().zip(other).map(|(u, v)| u * v).sum();
            g[(a + 1) * m + (c + 1)] = dot;
            g[(c + 1) * m + (a + 1)] = dot;
        }
    }
    let ridge = 1e-8 * (0..m).map(|i| g[i * m + i]).fold(0.0f64, f64::max).max(1.0);
    for i in 0..m {
        g[i * m + i] += ridge;
    }
    // Cholesky solve.
    for i in 0..m {
        for j in 0..=i {
            let mut sum = g[i * m + j];
            for t in 0..j {
                sum -= g[i * m + t] * g[j * m + t];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                g[i * m + i] = sum.sqrt();
            } else {
                g[i * m + j] = sum / g[j * m + j];
            }
        }
    }
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
    let mut rss = 0.0;
    for i in 0..n {
        let mut pred = b[0];
        for (a, col) in x.iter().enumerate() {
            pred += b[a + 1] * col[i];
        }
        let e = y[i] - pred;
        rss += e * e;
    }
    Some(rss / (n - m) as f64)
}

/// Node-depth tally across kept draws: (internal nodes, total nodes) per depth.
pub type DepthTally = Vec<(u64, u64)>;

/// Kept-draw summaries of one fit.
#[derive(Debug, Clone)]
pub struct BartFit {
    pub inclusion: InclusionSummary,
    pub sigma2_draws: Vec<f64>,
    /// Response scaling record: scaled = (y - shift)/scale - 0.5.
    pub shift: f64,
    pub scale: f64,
    /// Noise-prior scale actually used (in scaled-response space).
    pub lambda: f64,
    pub sigma_mu: f64,
    pub depth_tally: DepthTally,
    pub draw_split_counts: Option<Vec<Vec<u32>>>,
    /// The response was constant; the fit is degenerate by construction.
    pub constant_response: bool,
}

/// Fits the sum-of-trees model by backfitting MCMC and returns kept-draw
/// summaries plus inclusion proportions.
pub fn bart_fit(x: &[Vec<f64>], y: &[f64], cfg: &BartConfig) -> Result<BartFit> {
    cfg.validate()?;
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations { n, min: 2 });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("predictor matrix has no columns"));
    }
    for col in x {
        if col.len() != n {
            return Err(Error::Invalid(format!(
                "predictor column length {} does not match n = {}",
                col.len(),
                n
            )));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predictor matrix"));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let p = x.len();

    // Scale the response to [-0.5, 0.5].
    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let constant_response = y_max == y_min;
    let shift = y_min;
    let scale = if constant_response { 1.0 } else { y_max - y_min };
    let y_scaled: Vec<f64> = y.iter().map(|v| (v - shift) / scale - 0.5).collect();

    // The noise-prior scale anchors on a residual-variance guess: the linear
    // least-squares fit of the scaled response on the predictors when the
    // system is comfortably overdetermined, the response SD otherwise. The
    // raw response SD grossly overstates sigma on strong-signal data and the
    // inflated prior then suppresses structure acceptance.
    let sigma_guess2 = ols_residual_var(x, &y_scaled)
        .unwrap_or_else(|| {
            let sd = stats::sample_sd(&y_scaled);
            sd * sd
        })
        .max(0.0);
    let lambda = if sigma_guess2 > 0.0 {
        (sigma_guess2 * stats::chi2_quantile(1.0 - cfg.sigma_quantile, cfg.nu) / cfg.nu)
            .max(1e-12)
    } else {
        1e-12
    };
    let sigma_mu = 0.5 / (cfg.leaf_k * (cfg.n_trees as f64).sqrt());
    let sigma2_init = stats::population_var(&y_scaled).max(1e-6);

    let mut rng = rng_for(cfg.seed, Domain::Fit, 0);
    let mut sampler = Sampler::new(
        x,
        &y_scaled,
        cfg.n_trees,
        sigma_mu,
        cfg.nu,
        lambda,
        cfg.depth_alpha,
        cfg.depth_beta,
        sigma2_init,
        cfg.fixed_sigma2,
        cfg.freeze_trees,
    );

    for _ in 0..cfg.n_burn {
        sampler.sweep(&mut rng);
    }

    let mut q_acc = vec![0.0f64; p];
    let mut contributing = 0usize;
    let mut counts = vec![0u32; p];
    let mut sigma2_draws = Vec::with_capacity(cfg.n_keep);
    let mut depth_tally: DepthTally = Vec::new();
    let mut draw_split_counts = cfg.record_draw_counts.then(Vec::new);

    for draw in 0..cfg.n_keep {
        sampler.sweep(&mut rng);
        counts.iter_mut().for_each(|c| *c = 0);
        for tree in &sampler.trees {
            tree.count_split_vars(&mut counts);
        }
        let total: u32 = counts.iter().sum();
        if total > 0 {
            contributing += 1;
            for (qi, &c) in q_acc.iter_mut().zip(&counts) {
                *qi += c as f64 / total as f64;
            }
        }
        if let Some(log) = draw_split_counts.as_mut() {
            log.push(counts.clone());
        }
        if draw % cfg.tally_thin == 0 {
            for tree in &sampler.trees {
                tree.tally_depths(&mut depth_tally);
            }
        }
        sigma2_draws.push(sampler.sigma2);
    }

    let inclusion = if contributing == 0 {
        InclusionSummary {
            q: vec![0.0; p],
            no_split: true,
            contributing_draws: 0,
        }
    } else {
        InclusionSummary {
            q: q_acc.into_iter().map(|s| s / contributing as f64).collect(),
            no_split: false,
            contributing_draws: contributing,
        }
    };

    Ok(BartFit {
        inclusion,
        sigma2_draws,
        shift,
        scale,
        lambda,
        sigma_mu,
        depth_tally,
        draw_split_counts,
        constant_response,
    })
}
