//! Simulation designs, selection scoring, screening suites, and the
//! train/test RMSE protocol.
//!
//! Screen designs plant one operator's descriptor as the whole signal and
//! ask whether screening recovers it from the single-layer space. The
//! complex design plants a 3-composition and a 2-composition descriptor and
//! exercises the full iterative loop. Truth matching is canonical-string
//! equality, never correlation with the truth.

use crate::bart::BartConfig;
use crate::data::Dataset;
use crate::descriptor::{Descriptor, Operator, UnitContext, BINARY_OPS, UNARY_OPS};
use crate::error::{Error, Result};
use crate::pan::{pan_run, PanConfig, PanResult};
use crate::selectors::{gse_select, l0_best_subset, subset};
use crate::space::{DescriptorSpace, GenOptions};
use crate::stream::{child_seed, rng_for, Domain};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Operators whose screen designs draw positive (log-normal) features
/// because their domain is the nonnegative reals.
pub const LOGNORMAL_OPS: [Operator; 3] = [Operator::Log, Operator::Sqrt, Operator::Reciprocal];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DesignKind {
    /// y = 10 u(x1) + noise over the unary space of p features.
    UnaryScreen { op: Operator },
    /// y = 10 b(x1, x2) + noise over the binary space of p features.
    BinaryScreen { op: Operator },
    /// y = 15 {exp(x1) - exp(x2)}^2 + 20 sin(pi x3 x4) + noise.
    Complex,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimDesign {
    #[serde(flatten)]
    pub kind: DesignKind,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl SimDesign {
    pub fn unary_screen(op: Operator, replicates: usize, seed: u64) -> SimDesign {
        SimDesign {
            kind: DesignKind::UnaryScreen { op },
            n: 200,
            p: 5,
            sigma: 1.0,
            replicates,
            seed,
        }
    }

    pub fn binary_screen(op: Operator, replicates: usize, seed: u64) -> SimDesign {
        SimDesign {
            kind: DesignKind::BinaryScreen { op },
            n: 200,
            p: 5,
            sigma: 1.0,
            replicates,
            seed,
        }
    }

    pub fn complex(replicates: usize, seed: u64) -> SimDesign {
        SimDesign {
            kind: DesignKind::Complex,
            n: 250,
            p: 10,
            sigma: 0.5,
            replicates,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DesignKind::UnaryScreen { op } => {
                if op == Operator::Identity || op.arity() != 1 {
                    return Err(Error::Invalid(format!(
                        "'{}' is not a unary screen operator",
                        op.name()
                    )));
                }
            }
            DesignKind::BinaryScreen { op } => {
                if op.arity() != 2 {
                    return Err(Error::Invalid(format!(
                        "'{}' is not a binary screen operator",
                        op.name()
                    )));
                }
                if self.p < 2 {
                    return Err(Error::Invalid("binary screen needs p >= 2".into()));
                }
            }
            DesignKind::Complex => {
                if self.p < 4 {
                    return Err(Error::Invalid("complex design needs p >= 4".into()));
                }
            }
        }
        if self.n < 10 || self.p == 0 || self.sigma < 0.0 || self.replicates == 0 {
            return Err(Error::Invalid("degenerate simulation design".into()));
        }
        Ok(())
    }

    /// The canonical truth set for this design.
    pub fn truth(&self) -> Vec<Descriptor> {
        let ctx = UnitContext::Dimensionless;
        match self.kind {
            DesignKind::UnaryScreen { op } => {
                vec![Descriptor::apply_unary(op, &Descriptor::leaf(0, &ctx), &ctx)]
            }
            DesignKind::BinaryScreen { op } => vec![Descriptor::apply_binary(
                op,
                &Descriptor::leaf(0, &ctx),
                &Descriptor::leaf(1, &ctx),
                &ctx,
            )],
            DesignKind::Complex => vec![
                Descriptor::parse("((exp(x1)-exp(x2))^2)").unwrap(),
                Descriptor::parse("sin(pi*(x3*x4))").unwrap(),
            ],
        }
    }
}

/// Draws one replicate: features per the design's law, response with
/// N(0, sigma^2) noise, plus the canonical truth set.
pub fn generate_sim(design: &SimDesign, replicate: usize) -> Result<(Dataset, Vec<f64>, Vec<Descriptor>)> {
    design.validate()?;
    let rep_seed = child_seed(design.seed, Domain::Replicate, replicate as u64);
    let mut feat_rng = rng_for(rep_seed, Domain::Features, 0);
    let mut noise_rng = rng_for(rep_seed, Domain::Noise, 0);

    let columns: Vec<Vec<f64>> = match design.kind {
        DesignKind::UnaryScreen { op } if LOGNORMAL_OPS.contains(&op) => (0..design.p)
            .map(|_| {
                (0..design.n)
                    // Log-mean 2, log-SD 0.5.
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut feat_rng);
                        (2.0 + 0.5 * z).exp()
                    })
                    .collect()
            })
            .collect(),
        DesignKind::UnaryScreen { .. } | DesignKind::BinaryScreen { .. } => (0..design.p)
            .map(|_| {
                (0..design.n)
                    .map(|_| StandardNormal.sample(&mut feat_rng))
                    .collect()
            })
            .collect(),
        DesignKind::Complex => (0..design.p)
            .map(|_| {
                (0..design.n)
                    .map(|_| feat_rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect(),
    };

    let signal: Vec<f64> = match design.kind {
        DesignKind::UnaryScreen { op } => {
            (0..design.n).map(|i| 10.0 * op.apply1(columns[0][i])).collect()
        }
        DesignKind::BinaryScreen { op } => (0..design.n)
            .map(|i| 10.0 * op.apply2(columns[0][i], columns[1][i]))
            .collect(),
        DesignKind::Complex => (0..design.n)
            .map(|i| {
                let d1 = (columns[0][i].exp() - columns[1][i].exp()).powi(2);
                let d2 = (std::f64::consts::PI * columns[2][i] * columns[3][i]).sin();
                15.0 * d1 + 20.0 * d2
            })
            .collect(),
    };
    let y: Vec<f64> = signal
        .iter()
        .map(|s| {
            let e: f64 = StandardNormal.sample(&mut noise_rng);
            s + design.sigma * e
        })
        .collect();

    let names = (0..design.p).map(|j| format!("x{}", j + 1)).collect();
    let data = Dataset::from_columns(names, columns)?;
    Ok((data, y, design.truth()))
}

/// TP/FP/FN counts and the derived metrics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Metrics from raw counts; precision and recall are 0 on an empty
/// denominator and F1 is 0 whenever TP is 0.
pub fn metrics_from_counts(tp: usize, fp: usize, fn_: usize) -> MetricReport {
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricReport {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f1,
    }
}

/// Scores a selection against the truth set by canonical-string equality.
pub fn score_selection(selected: &[Descriptor], truth: &[Descriptor]) -> MetricReport {
    let truth_set: std::collections::HashSet<&str> =
        truth.iter().map(|d| d.canonical_string()).collect();
    let selected_set: std::collections::HashSet<&str> =
        selected.iter().map(|d| d.canonical_string()).collect();
    let tp = selected_set.intersection(&truth_set).count();
    let fp = selected_set.len() - tp;
    let fn_ = truth_set.len() - tp;
    metrics_from_counts(tp, fp, fn_)
}

/// Settings shared by the screening suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub bart: BartConfig,
    pub permutations: usize,
    pub alpha: f64,
    pub dedup_threshold: f64,
    pub magnitude_cap: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            bart: BartConfig::desk(),
            permutations: 50,
            alpha: 0.05,
            dedup_threshold: crate::space::DEFAULT_DEDUP_THRESHOLD,
            magnitude_cap: 1e8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreenOutcome {
    pub design: SimDesign,
    pub replicate: usize,
    pub metrics: MetricReport,
    pub selected: Vec<String>,
    /// For subtract / abs-difference binary screens: both orientations of the
    /// pair phenomenon were selected together.
    pub co_selected_sub_absdiff: Option<bool>,
    /// Empirical correlation between (x1-x2) and |x1-x2| on this replicate's
    /// data, when both columns exist.
    pub sub_absdiff_correlation: Option<f64>,
}

/// Runs one screen design across its replicates (concurrently; results are
/// ordered by replicate, so scheduling cannot change them).
pub fn run_screen_suite(design: &SimDesign, cfg: &ScreenConfig) -> Result<Vec<ScreenOutcome>> {
    design.validate()?;
    (0..design.replicates)
        .into_par_iter()
        .map(|r| run_screen_replicate(design, cfg, r))
        .collect()
}

fn run_screen_replicate(
    design: &SimDesign,
    cfg: &ScreenConfig,
    replicate: usize,
) -> Result<ScreenOutcome> {
    let (data, y, truth) = generate_sim(design, replicate)?;
    let base = DescriptorSpace::from_dataset(&data);
    let opts = GenOptions {
        magnitude_cap: cfg.magnitude_cap,
        dedup_threshold: Some(cfg.dedup_threshold),
        unit_filter: false,
        origin: 1,
    };
    let (space, _report) = match design.kind {
        DesignKind::UnaryScreen { .. } => base.generate_unary(&UNARY_OPS, &opts)?,
        DesignKind::BinaryScreen { .. } => base.generate_binary(&BINARY_OPS, &opts)?,
        DesignKind::Complex => {
            return Err(Error::Invalid(
                "complex designs run through the iterative loop, not the screen suite".into(),
            ))
        }
    };
    let rep_seed = child_seed(design.seed, Domain::Replicate, replicate as u64);
    let bart = cfg.bart.clone().with_seed(child_seed(rep_seed, Domain::Fit, 0));
    let gse = gse_select(space.columns(), &y, &bart, cfg.permutations, cfg.alpha)?;

    let selected_desc: Vec<Descriptor> = gse
        .selected
        .iter()
        .map(|&i| space.descriptor(i).clone())
        .collect();
    let metrics = score_selection(&selected_desc, &truth);
    let selected: Vec<String> = selected_desc
        .iter()
        .map(|d| d.canonical_string().to_string())
        .collect();

    let (co_selected, sub_absdiff_correlation) = match design.kind {
        DesignKind::BinaryScreen { op }
            if op == Operator::Subtract || op == Operator::AbsDiff =>
        {
            let has = |name: &str| selected.iter().any(|s| s == name);
            let find = |name: &str| {
                space
                    .descriptors()
                    .iter()
                    .position(|d| d.canonical_string() == name)
            };
            let corr = match (find("(x1-x2)"), find("|x1-x2|")) {
                (Some(a), Some(b)) => crate::stats::pearson(space.column(a), space.column(b)),
                _ => None,
            };
            (Some(has("(x1-x2)") && has("|x1-x2|")), corr)
        }
        _ => (None, None),
    };

    Ok(ScreenOutcome {
        design: *design,
        replicate,
        metrics,
        selected,
        co_selected_sub_absdiff: co_selected,
        sub_absdiff_correlation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexOutcome {
    pub replicate: usize,
    /// Metrics of the final reported model (subset stage when enabled).
    pub metrics: MetricReport,
    /// Metrics of the lasso stage before subset refinement.
    pub lasso_metrics: MetricReport,
    pub selected: Vec<String>,
    /// Post-filter size of every generated space, X_0 .. X_M.
    pub space_log: Vec<usize>,
    pub iterations_run: usize,
}

/// Runs the complex design through the full loop, one job per replicate.
pub fn run_complex_suite(design: &SimDesign, pan_cfg: &PanConfig) -> Result<Vec<ComplexOutcome>> {
    design.validate()?;
    if !matches!(design.kind, DesignKind::Complex) {
        return Err(Error::Invalid("not a complex design".into()));
    }
    (0..design.replicates)
        .into_par_iter()
        .map(|r| {
            let (data, y, truth) = generate_sim(design, r)?;
            let rep_seed = child_seed(design.seed, Domain::Replicate, r as u64);
            let mut cfg = pan_cfg.clone();
            cfg.seed = rep_seed;
            let result = pan_run(&data, &y, &cfg)?;
            Ok(complex_outcome(r, &result, &truth))
        })
        .collect()
}

fn complex_outcome(replicate: usize, result: &PanResult, truth: &[Descriptor]) -> ComplexOutcome {
    let metrics = score_selection(&result.model.descriptors, truth);
    let lasso_metrics = score_selection(&result.lasso.selected, truth);
    ComplexOutcome {
        replicate,
        metrics,
        lasso_metrics,
        selected: result
            .model
            .descriptors
            .iter()
            .map(|d| d.canonical_string().to_string())
            .collect(),
        space_log: result.space_log.clone(),
        iterations_run: result.iterations_run,
    }
}

/// The train/test protocol: random splits, the full loop on the training
/// part, best-k least-squares models evaluated on the held-out part.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmseConfig {
    pub splits: usize,
    pub train_fraction: f64,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for RmseConfig {
    fn default() -> Self {
        RmseConfig {
            splits: 50,
            train_fraction: 0.9,
            k_max: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseRow {
    pub split: usize,
    pub k: usize,
    /// Number of descriptors actually in the model (no padding when the
    /// selected set is smaller than k).
    pub model_size: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseSummary {
    pub k: usize,
    pub mean: f64,
    pub sd: f64,
    pub splits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
    pub per_k: Vec<RmseSummary>,
    /// Splits abandoned because a selected descriptor failed to evaluate on
    /// the held-out rows.
    pub failed_splits: usize,
}

pub fn cross_validate_rmse(
    data: &Dataset,
    y: &[f64],
    pan_cfg: &PanConfig,
    cfg: &RmseConfig,
) -> Result<RmseTable> {
    let n = data.n_rows;
    if y.len() != n {
        return Err(Error::Invalid("response length mismatch".into()));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::Invalid("train_fraction outside (0,1)".into()));
    }
    let train_n = ((cfg.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    if n - train_n < 1 {
        return Err(Error::Invalid("empty test set".into()));
    }
    if cfg.k_max == 0 || cfg.splits == 0 {
        return Err(Error::Invalid("k_max and splits must be positive".into()));
    }

    let outcomes: Vec<Result<Vec<RmseRow>>> = (0..cfg.splits)
        .into_par_iter()
        .map(|split| rmse_split(data, y, pan_cfg, cfg, split, train_n))
        .collect();

    let mut rows = Vec::new();
    let mut failed_splits = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(mut r) => rows.append(&mut r),
            Err(Error::DomainViolation { .. }) => failed_splits += 1,
            Err(e) => return Err(e),
        }
    }

    let mut per_k = Vec::new();
    for k in 1..=cfg.k_max {
        let vals: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.rmse).collect();
        if vals.is_empty() {
            continue;
        }
        per_k.push(RmseSummary {
            k,
            mean: crate::stats::mean(&vals),
            sd: crate::stats::sample_sd(&vals),
            splits: vals.len(),
        });
    }
    Ok(RmseTable {
        rows,
        per_k,
        failed_splits,
    })
}

fn rmse_split(
    data: &Dataset,
    y: &[f64],
    pan_cfg: &PanConfig,
    cfg: &RmseConfig,
    split: usize,
    train_n: usize,
) -> Result<Vec<RmseRow>> {
    let n = data.n_rows;
    let mut order: Vec<usize> = (0..n).collect();
    {
        use rand::seq::SliceRandom;
        let mut rng = rng_for(cfg.seed, Domain::Replicate, split as u64);
        order.shuffle(&mut rng);
    }
    let (train_rows, test_rows) = order.split_at(train_n);

    let gather = |rows: &[usize]| -> Vec<Vec<f64>> {
        data.columns
            .iter()
            .map(|col| rows.iter().map(|&i| col[i]).collect())
            .collect()
    };
    let mut train_data = Dataset::from_columns(data.names.clone(), gather(train_rows))?;
    train_data.units = data.units.clone();
    let train_y: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
    let test_cols = gather(test_rows);
    let test_y: Vec<f64> = test_rows.iter().map(|&i| y[i]).collect();

    let mut run_cfg = pan_cfg.clone();
    run_cfg.seed = child_seed(cfg.seed, Domain::Replicate, split as u64);
    run_cfg.l0 = None; // the per-k sweep below replaces the final subset stage
    let result = pan_run(&train_data, &train_y, &run_cfg)?;

    let selected = &result.lasso.selected;
    let train_cols_eval: Vec<Vec<f64>> = selected
        .iter()
        .map(|d| d.evaluate(&train_data.columns, run_cfg.magnitude_cap))
        .collect::<Result<_>>()?;

    let mut rows_out = Vec::with_capacity(cfg.k_max);
    for k in 1..=cfg.k_max {
        let (subset_idx, coefs) = if selected.is_empty() {
            (Vec::new(), vec![crate::stats::mean(&train_y)])
        } else if k >= selected.len() {
            let all: Vec<usize> = (0..selected.len()).collect();
            match subset::least_squares_fit(&train_cols_eval, &train_y, &all) {
                Some((c, _)) => (all, c),
                None => continue,
            }
        } else {
            let r = l0_best_subset(&train_cols_eval, &train_y, k, pan_cfg.subset_budget as u128)?;
            (r.subset.clone(), r.coefficients)
        };

        // Evaluate the chosen descriptors on the held-out rows.
        let mut preds = vec![coefs[0]; test_y.len()];
        for (pos, &j) in subset_idx.iter().enumerate() {
            let col = selected[j].evaluate(&test_cols, run_cfg.magnitude_cap)?;
            for (pi, v) in preds.iter_mut().zip(&col) {
                *pi += coefs[pos + 1] * v;
            }
        }
        let mse: f64 = preds
            .iter()
            .zip(&test_y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / test_y.len() as f64;
        rows_out.push(RmseRow {
            split,
            k,
            model_size: subset_idx.len(),
            rmse: mse.sqrt(),
        });
    }
    Ok(rows_out)
}
