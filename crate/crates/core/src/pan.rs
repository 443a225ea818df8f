//! The iterative selection loop: alternate descriptor generation with
//! nonparametric screening until a stopping rule fires, then run parametric
//! selection (lasso, optionally best-subset refinement).
//!
//! Each round screens the current space with the permutation-thresholded
//! tree-ensemble fit, grows the next space by applying the scheduled
//! operator set to the union of everything selected so far (identity
//! membership keeps earlier selections alive), and stops when either the
//! iteration cap or the correlation target is reached.

use crate::bart::BartConfig;
use crate::data::Dataset;
use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::selectors::{gse_select, lasso_cv_rule, select_k_sweep, subset};
use crate::space::{DescriptorSpace, GenOptions, GenReport, DEFAULT_DEDUP_THRESHOLD};
use crate::stream::{child_seed, Domain};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Pick automatically: binary-first when the primaries are strongly
    /// collinear (max pairwise |r| > 0.9), unary-first otherwise.
    Auto,
    UnaryFirst,
    BinaryFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolvedScheme {
    UnaryFirst,
    BinaryFirst,
}

impl ResolvedScheme {
    /// Operator set used to generate X_{m+1} from the union after round m.
    fn unary_step(self, m: usize) -> bool {
        match self {
            ResolvedScheme::UnaryFirst => m.is_multiple_of(2),
            ResolvedScheme::BinaryFirst => !m.is_multiple_of(2),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L0Options {
    /// Subset size cap k.
    pub k: usize,
    /// Tune k in 1..=k by AIC instead of forcing exactly k.
    pub tune_by_aic: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PanConfig {
    pub scheme: Scheme,
    /// Iteration cap M_max.
    pub max_iterations: usize,
    /// Correlation stopping target in (0,1).
    pub rho_max: f64,
    /// Optional best-subset refinement of the lasso stage.
    pub l0: Option<L0Options>,
    pub bart: BartConfig,
    pub dedup_threshold: f64,
    pub unit_filter: bool,
    /// Permutation count B for the screening threshold.
    pub permutations: usize,
    /// Simultaneous coverage level for the screening threshold.
    pub alpha: f64,
    /// Domain cap on |value| of evaluated descriptors.
    pub magnitude_cap: f64,
    /// Cross-validation folds for the lasso stage.
    pub folds: usize,
    /// Penalty-selection rule for the lasso stage.
    pub lasso_rule: crate::selectors::CvRule,
    /// Exhaustive-search budget for the subset stage.
    pub subset_budget: u64,
    pub seed: u64,
}

impl Default for PanConfig {
    fn default() -> Self {
        PanConfig {
            scheme: Scheme::Auto,
            max_iterations: 4,
            rho_max: 0.95,
            l0: None,
            bart: BartConfig::default(),
            dedup_threshold: DEFAULT_DEDUP_THRESHOLD,
            unit_filter: false,
            permutations: 50,
            alpha: 0.05,
            magnitude_cap: 1e8,
            folds: 10,
            lasso_rule: crate::selectors::CvRule::OneStandardError,
            subset_budget: subset::DEFAULT_SUBSET_BUDGET as u64,
            seed: 0,
        }
    }
}

impl PanConfig {
    pub fn validate(&self) -> Result<()> {
        self.bart.validate()?;
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(Error::Invalid(format!("rho_max {} outside (0,1)", self.rho_max)));
        }
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return Err(Error::Invalid(format!(
                "dedup_threshold {} outside (0,1]",
                self.dedup_threshold
            )));
        }
        if self.permutations < 2 {
            return Err(Error::Invalid("need at least 2 permutations".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if self.folds < 2 {
            return Err(Error::Invalid("need at least 2 folds".into()));
        }
        if self.magnitude_cap <= 0.0 {
            return Err(Error::Invalid("magnitude_cap must be positive".into()));
        }
        if let Some(l0) = &self.l0 {
            if l0.k == 0 {
                return Err(Error::Invalid("l0 subset size k must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One screening round of the loop.
#[derive(Debug, Clone, Serialize)]
pub struct IterationAudit {
    pub iteration: usize,
    /// Size of the space screened this round (p_m).
    pub space_size: usize,
    /// Max |correlation| of that space with the response.
    pub rho: f64,
    /// Descriptors the screen selected (s_m).
    pub selected: Vec<String>,
    /// Screening selected nothing; the previous union was carried forward.
    pub carried_forward: bool,
    /// Union size after merging this round's selection.
    pub union_size: usize,
    /// Generation counts for the next space.
    pub generation: GenReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct LassoStage {
    pub selected: Vec<Descriptor>,
    /// Lasso coefficients aligned with `selected`, original scale.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub chosen_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct L0Row {
    pub k: usize,
    pub aic: f64,
    pub descriptors: Vec<Descriptor>,
    /// Intercept first, then per-descriptor least-squares coefficients.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct L0Stage {
    pub table: Vec<L0Row>,
    /// Index into `table` of the AIC winner (equals k-1 when tuned).
    pub chosen: usize,
}

/// The model reported at the end: the subset-stage winner when it ran, the
/// lasso support otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct FinalModel {
    pub descriptors: Vec<Descriptor>,
    /// Intercept first, then per-descriptor coefficients (least squares when
    /// available, lasso otherwise).
    pub coefficients: Vec<f64>,
    pub aic: f64,
    pub least_squares: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PanResult {
    pub scheme_used: ResolvedScheme,
    pub iterations_run: usize,
    pub audit: Vec<IterationAudit>,
    /// Sizes of X_0 .. X_M (post-filter, post-dedup).
    pub space_log: Vec<usize>,
    /// Max |correlation| with the response for each space in `space_log`.
    pub rho_log: Vec<f64>,
    pub lasso: LassoStage,
    pub l0: Option<L0Stage>,
    pub model: FinalModel,
    #[serde(skip_serializing)]
    pub elapsed_secs: f64,
    #[serde(skip_serializing)]
    pub final_space: DescriptorSpace,
}

/// Maximum absolute correlation scan (constant columns contribute zero).
pub fn correlation_scan(space: &DescriptorSpace, y: &[f64]) -> Result<(f64, usize)> {
    space.correlation_with(y)
}

fn resolve_scheme(scheme: Scheme, space: &DescriptorSpace) -> ResolvedScheme {
    match scheme {
        Scheme::UnaryFirst => ResolvedScheme::UnaryFirst,
        Scheme::BinaryFirst => ResolvedScheme::BinaryFirst,
        Scheme::Auto => {
            let cols = space.columns();
            let mut max_r = 0.0f64;
            for i in 0..cols.len() {
                for j in (i + 1)..cols.len() {
                    if let Some(r) = crate::stats::pearson(&cols[i], &cols[j]) {
                        max_r = max_r.max(r.abs());
                    }
                }
            }
            if max_r > 0.9 {
                ResolvedScheme::BinaryFirst
            } else {
                ResolvedScheme::UnaryFirst
            }
        }
    }
}

/// Runs the full loop on primary features and a response.
pub fn pan_run(data: &Dataset, y: &[f64], cfg: &PanConfig) -> Result<PanResult> {
    cfg.validate()?;
    if y.len() != data.n_rows {
        return Err(Error::Invalid(format!(
            "response length {} does not match {} rows",
            y.len(),
            data.n_rows
        )));
    }
    if data.n_rows < 10 {
        return Err(Error::TooFewObservations {
            n: data.n_rows,
            min: 10,
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let started = Instant::now();

    let mut space = DescriptorSpace::from_dataset(data);
    let scheme_used = resolve_scheme(cfg.scheme, &space);

    // Union of everything selected so far, insertion-ordered.
    let mut union_desc: Vec<Descriptor> = Vec::new();
    let mut union_cols: Vec<Vec<f64>> = Vec::new();
    let mut union_origin: Vec<u32> = Vec::new();
    let mut union_seen: std::collections::HashSet<String> = std::collections::HashSet::new();

    let mut audit: Vec<IterationAudit> = Vec::new();
    let (mut rho, _) = space.correlation_with(y)?;
    let mut space_log = vec![space.len()];
    let mut rho_log = vec![rho];

    // Alternate screening and generation. A new space is generated only when
    // another screening round will follow, so the parametric stage always
    // sees either a screened space (iteration-cap exit) or one whose maximum
    // absolute correlation already reached the target (rho exit). Generating
    // past the last screen would instead hand the linear stage unvetted
    // composites of the screened descriptors (sums, products of the selected
    // set), which both blows up the final space quadratically and makes the
    // selected set ambiguous under an l1 penalty.
    let mut m = 0usize;
    while m < cfg.max_iterations && rho < cfg.rho_max {
        let iter_seed = child_seed(cfg.seed, Domain::Iteration, m as u64);
        let bart_cfg = cfg.bart.clone().with_seed(iter_seed);
        let gse = gse_select(space.columns(), y, &bart_cfg, cfg.permutations, cfg.alpha)?;
        let carried_forward = gse.selected.is_empty();
        if carried_forward && m == 0 {
            return Err(Error::NoSignal);
        }
        let mut selected_names = Vec::with_capacity(gse.selected.len());
        for &i in &gse.selected {
            let d = space.descriptor(i);
            selected_names.push(d.canonical_string().to_string());
            if union_seen.insert(d.canonical_string().to_string()) {
                union_desc.push(d.clone());
                union_cols.push(space.column(i).to_vec());
                union_origin.push(space.origin(i));
            }
        }
        let screened_size = space.len();
        let rho_at_screen = rho;
        m += 1;

        let mut gen_report = GenReport::default();
        if m < cfg.max_iterations {
            let union_space = DescriptorSpace::from_parts(
                union_desc.clone(),
                union_cols.clone(),
                union_origin.clone(),
                space.unit_context().clone(),
                data.n_rows,
            );
            let opts = GenOptions {
                magnitude_cap: cfg.magnitude_cap,
                dedup_threshold: Some(cfg.dedup_threshold),
                unit_filter: cfg.unit_filter,
                origin: m as u32,
            };
            let generated = if scheme_used.unary_step(m - 1) {
                union_space.generate_unary(&crate::descriptor::UNARY_OPS, &opts)
            } else {
                union_space.generate_binary(&crate::descriptor::BINARY_OPS, &opts)
            };
            let next_space = match generated {
                Ok((next, report)) => {
                    gen_report = report;
                    next
                }
                // A one-descriptor union cannot form pairs; the round carries
                // the current space (which embeds the union) instead.
                Err(Error::TooFewDescriptors(_)) => space.clone(),
                Err(e) => return Err(e),
            };
            space = next_space;
            let scan = space.correlation_with(y)?;
            rho = scan.0;
            space_log.push(space.len());
            rho_log.push(rho);
        }

        audit.push(IterationAudit {
            iteration: m - 1,
            space_size: screened_size,
            rho: rho_at_screen,
            selected: selected_names,
            carried_forward,
            union_size: union_desc.len(),
            generation: gen_report,
        });
    }

    // Parametric stage. On a correlation exit the current (generated) space
    // holds the strongly associated descriptor and is handed over as-is; on
    // an iteration-cap exit the screened union is the vetted candidate set.
    if m >= cfg.max_iterations && rho < cfg.rho_max && !union_desc.is_empty() {
        space = DescriptorSpace::from_parts(
            union_desc.clone(),
            union_cols.clone(),
            union_origin.clone(),
            space.unit_context().clone(),
            data.n_rows,
        );
    }

    let lasso_seed = child_seed(cfg.seed, Domain::Fold, 0);
    let lasso_fit =
        lasso_cv_rule(space.columns(), y, cfg.folds, lasso_seed, cfg.lasso_rule)?;
    let lasso = LassoStage {
        selected: lasso_fit
            .selected
            .iter()
            .map(|&i| space.descriptor(i).clone())
            .collect(),
        coefficients: lasso_fit
            .selected
            .iter()
            .map(|&i| lasso_fit.coefficients[i])
            .collect(),
        intercept: lasso_fit.intercept,
        chosen_lambda: lasso_fit.chosen_lambda,
    };

    let x_star: Vec<usize> = lasso_fit.selected.clone();
    let mut l0_stage: Option<L0Stage> = None;
    let (model_indices, model_coefs, model_aic, model_is_ls): (Vec<usize>, Vec<f64>, f64, bool);

    if let (Some(l0cfg), false) = (&cfg.l0, x_star.is_empty()) {
        if x_star.len() > l0cfg.k {
            let sub_cols: Vec<Vec<f64>> = x_star.iter().map(|&i| space.column(i).to_vec()).collect();
            let budget = cfg.subset_budget as u128;
            let (table, chosen) = if l0cfg.tune_by_aic {
                let sweep = select_k_sweep(&sub_cols, y, l0cfg.k, budget)?;
                let rows = sweep
                    .per_k
                    .iter()
                    .map(|r| subset_row(r, &x_star, &space))
                    .collect::<Vec<_>>();
                (rows, sweep.best_index)
            } else {
                let single = subset::l0_best_subset(&sub_cols, y, l0cfg.k.min(x_star.len()), budget)?;
                (vec![subset_row(&single, &x_star, &space)], 0)
            };
            let row = &table[chosen];
            model_indices = row
                .descriptors
                .iter()
                .map(|d| {
                    space
                        .descriptors()
                        .iter()
                        .position(|s| s == d)
                        .expect("subset descriptor came from the space")
                })
                .collect();
            model_coefs = row.coefficients.clone();
            model_aic = row.aic;
            model_is_ls = true;
            l0_stage = Some(L0Stage { table, chosen });
        } else {
            let (coefs, aic_value, is_ls) = final_ls(&space, y, &x_star, &lasso_fit);
            model_indices = x_star.clone();
            model_coefs = coefs;
            model_aic = aic_value;
            model_is_ls = is_ls;
        }
    } else {
        let (coefs, aic_value, is_ls) = final_ls(&space, y, &x_star, &lasso_fit);
        model_indices = x_star.clone();
        model_coefs = coefs;
        model_aic = aic_value;
        model_is_ls = is_ls;
    }

    let model = FinalModel {
        descriptors: model_indices
            .iter()
            .map(|&i| space.descriptor(i).clone())
            .collect(),
        coefficients: model_coefs,
        aic: model_aic,
        least_squares: model_is_ls,
    };

    Ok(PanResult {
        scheme_used,
        iterations_run: m,
        audit,
        space_log,
        rho_log,
        lasso,
        l0: l0_stage,
        model,
        elapsed_secs: started.elapsed().as_secs_f64(),
        final_space: space,
    })
}

fn subset_row(r: &subset::SubsetResult, x_star: &[usize], space: &DescriptorSpace) -> L0Row {
    L0Row {
        k: r.subset.len(),
        aic: r.aic,
        descriptors: r
            .subset
            .iter()
            .map(|&pos| space.descriptor(x_star[pos]).clone())
            .collect(),
        coefficients: r.coefficients.clone(),
    }
}

/// Least-squares refit of the lasso support, falling back to the (shrunk)
/// lasso coefficients when the support is collinear.
fn final_ls(
    space: &DescriptorSpace,
    y: &[f64],
    x_star: &[usize],
    lasso_fit: &crate::selectors::LassoResult,
) -> (Vec<f64>, f64, bool) {
    let n = y.len();
    if x_star.is_empty() {
        let mean = y.iter().sum::<f64>() / n as f64;
        let rss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        return (vec![mean], subset::aic(n, rss, 0), true);
    }
    let cols: Vec<Vec<f64>> = x_star.iter().map(|&i| space.column(i).to_vec()).collect();
    let all: Vec<usize> = (0..cols.len()).collect();
    match subset::least_squares_fit(&cols, y, &all) {
        Some((coefs, rss)) => (coefs, subset::aic(n, rss, x_star.len()), true),
        None => {
            let mut coefs = vec![lasso_fit.intercept];
            let mut rss = 0.0;
            for i in 0..n {
                let mut pred = lasso_fit.intercept;
                for (pos, &j) in x_star.iter().enumerate() {
                    pred += lasso_fit.coefficients[j] * cols[pos][i];
                }
                rss += (y[i] - pred) * (y[i] - pred);
            }
            coefs.extend(x_star.iter().map(|&j| lasso_fit.coefficients[j]));
            (coefs, subset::aic(n, rss, x_star.len()), false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::rng_for;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn tiny_pan(seed: u64) -> PanConfig {
        PanConfig {
            bart: BartConfig {
                n_burn: 200,
                n_keep: 200,
                ..BartConfig::default()
            },
            permutations: 6,
            seed,
            ..PanConfig::default()
        }
    }

    fn uniform_data(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = rng_for(seed, Domain::Features, 0);
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let names = (0..p).map(|j| format!("x{}", j + 1)).collect();
        Dataset::from_columns(names, columns).unwrap()
    }

    #[test]
    fn high_correlation_skips_straight_to_lasso() {
        let data = uniform_data(60, 4, 3);
        let mut nrng = rng_for(3, Domain::Noise, 0);
        let y: Vec<f64> = (0..60)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                5.0 * data.columns[2][i] + 0.05 * e
            })
            .collect();
        let r = pan_run(&data, &y, &tiny_pan(1)).unwrap();
        assert_eq!(r.iterations_run, 0);
        assert!(r.audit.is_empty());
        assert!(r
            .model
            .descriptors
            .iter()
            .any(|d| d.canonical_string() == "x3"));
    }

    #[test]
    fn one_round_finds_a_unary_descriptor() {
        let data = uniform_data(120, 4, 7);
        let mut nrng = rng_for(7, Domain::Noise, 0);
        let y: Vec<f64> = (0..120)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                8.0 * (std::f64::consts::PI * data.columns[0][i]).sin() + 0.2 * e
            })
            .collect();
        let mut cfg = tiny_pan(5);
        cfg.scheme = Scheme::UnaryFirst;
        cfg.l0 = Some(L0Options {
            k: 2,
            tune_by_aic: true,
        });
        let r = pan_run(&data, &y, &cfg).unwrap();
        assert!(r.iterations_run >= 1);
        assert_eq!(r.space_log.len(), r.iterations_run + 1);
        assert!(r
            .model
            .descriptors
            .iter()
            .any(|d| d.canonical_string() == "sin(pi*x1)"));
        // The loop terminates within the selector-call bound.
        assert!(r.iterations_run <= cfg.max_iterations);
        // Audit sizes match the space log.
        for (row, expected) in r.audit.iter().zip(&r.space_log) {
            assert_eq!(row.space_size, *expected);
        }
    }

    #[test]
    fn persistence_of_selected_descriptors() {
        let data = uniform_data(120, 4, 11);
        let mut nrng = rng_for(11, Domain::Noise, 0);
        let y: Vec<f64> = (0..120)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                6.0 * data.columns[1][i] * data.columns[2][i] + 0.3 * e
            })
            .collect();
        let mut cfg = tiny_pan(13);
        cfg.scheme = Scheme::UnaryFirst;
        cfg.max_iterations = 2;
        let r = pan_run(&data, &y, &cfg).unwrap();
        // Everything selected in any round is still in the final space.
        let final_names: std::collections::HashSet<&str> = r
            .final_space
            .descriptors()
            .iter()
            .map(|d| d.canonical_string())
            .collect();
        for row in &r.audit {
            for name in &row.selected {
                assert!(
                    final_names.contains(name.as_str()),
                    "{name} dropped from a later space"
                );
            }
        }
    }

    #[test]
    fn seed_determinism_end_to_end() {
        let data = uniform_data(80, 3, 21);
        let mut nrng = rng_for(21, Domain::Noise, 0);
        let y: Vec<f64> = (0..80)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut nrng);
                7.0 * data.columns[0][i].powi(2) + 0.3 * e
            })
            .collect();
        let a = pan_run(&data, &y, &tiny_pan(31)).unwrap();
        let b = pan_run(&data, &y, &tiny_pan(31)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn pure_noise_aborts_with_no_signal() {
        let data = uniform_data(60, 3, 41);
        let mut nrng = rng_for(41, Domain::Noise, 0);
        let y: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut nrng)).collect();
        // Noise only: iteration 0 usually selects nothing and must abort
        // rather than expand a meaningless space.
        match pan_run(&data, &y, &tiny_pan(2)) {
            Err(Error::NoSignal) => {}
            Ok(r) => {
                // A rare false positive is tolerated; the run must still have
                // finished within bounds.
                assert!(r.iterations_run <= 4);
            }
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn input_validation() {
        let data = uniform_data(8, 2, 1);
        let y = vec![0.0; 8];
        assert!(matches!(
            pan_run(&data, &y, &tiny_pan(0)),
            Err(Error::TooFewObservations { .. })
        ));
        let data = uniform_data(20, 2, 1);
        let bad_cfg = PanConfig {
            rho_max: 1.5,
            ..tiny_pan(0)
        };
        assert!(pan_run(&data, &vec![0.0; 20], &bad_cfg).is_err());
    }
}
