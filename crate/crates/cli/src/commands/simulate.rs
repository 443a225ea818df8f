//! `ibart simulate`: run suites of screening / complex-model simulations
//! from a JSON definition.

use crate::manifest::{to_json_file, RunManifest};
use crate::Ctx;
use anyhow::{Context, Result};
use clap::Args;
use ibart_core::pan::PanConfig;
use ibart_core::sim::{
    run_complex_suite, run_screen_suite, ComplexOutcome, ScreenConfig, ScreenOutcome, SimDesign,
};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct SimulateArgs {
    /// Suite definition JSON.
    #[arg(long)]
    suite: PathBuf,

    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,

    /// Also write long-format per-replicate metric rows for plotting.
    #[arg(long)]
    emit_plot_data: bool,
}

/// Suite definition: screen designs run one generation layer plus the
/// screening threshold; complex designs run the full loop.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct SuiteSpec {
    screens: Vec<SimDesign>,
    complex: Vec<ComplexJob>,
    screen_config: Option<ScreenConfig>,
    pan_config: Option<PanConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComplexJob {
    #[serde(flatten)]
    design: SimDesign,
    pan: Option<PanConfig>,
}

#[derive(Serialize)]
struct SuiteSummary {
    screens: Vec<ScreenSummary>,
    complex: Vec<ComplexSummary>,
}

#[derive(Serialize)]
struct ScreenSummary {
    design: SimDesign,
    replicates: usize,
    tp_exactly_one: usize,
    mean_fp: f64,
    co_selection_count: Option<usize>,
}

#[derive(Serialize)]
struct ComplexSummary {
    design: SimDesign,
    replicates: usize,
    tp_two: usize,
    median_f1: f64,
    max_space: usize,
}

pub fn run(ctx: &Ctx, args: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.suite)
        .with_context(|| format!("reading suite {}", args.suite.display()))?;
    let spec: SuiteSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing suite {}", args.suite.display()))?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut manifest = RunManifest::new("simulate", ctx.seed, &text);
    manifest.add_input(&args.suite)?;

    let screen_cfg = spec.screen_config.clone().unwrap_or(ScreenConfig {
        bart: ctx.profile_bart.clone(),
        ..ScreenConfig::default()
    });

    let mut screen_outcomes: Vec<ScreenOutcome> = Vec::new();
    let mut screen_summaries = Vec::new();
    for design in &spec.screens {
        let outcomes = run_screen_suite(design, &screen_cfg)?;
        screen_summaries.push(summarize_screen(design, &outcomes));
        screen_outcomes.extend(outcomes);
    }

    let mut complex_outcomes: Vec<(SimDesign, Vec<ComplexOutcome>)> = Vec::new();
    let mut complex_summaries = Vec::new();
    for job in &spec.complex {
        let pan = job
            .pan
            .clone()
            .or_else(|| spec.pan_config.clone())
            .unwrap_or_else(|| PanConfig {
                bart: ctx.profile_bart.clone(),
                ..PanConfig::default()
            });
        let outcomes = run_complex_suite(&job.design, &pan)?;
        complex_summaries.push(summarize_complex(&job.design, &outcomes));
        complex_outcomes.push((job.design, outcomes));
    }

    // Per-replicate CSV.
    let rows_path = args.out_dir.join("replicates.csv");
    write_replicates_csv(&rows_path, &screen_outcomes, &complex_outcomes)?;
    manifest.add_output(&rows_path);

    let summary_path = args.out_dir.join("summary.json");
    to_json_file(
        &SuiteSummary {
            screens: screen_summaries,
            complex: complex_summaries,
        },
        &summary_path,
    )?;
    manifest.add_output(&summary_path);

    if args.emit_plot_data {
        let plot_path = args.out_dir.join("plot_data.csv");
        write_plot_data(&plot_path, &screen_outcomes, &complex_outcomes)?;
        manifest.add_output(&plot_path);
    }

    let manifest_path =
        manifest.write_next_to(&summary_path, ctx.started.elapsed().as_secs_f64())?;
    println!(
        "suite finished: {} screen replicate(s), {} complex replicate(s); wrote {}",
        screen_outcomes.len(),
        complex_outcomes.iter().map(|(_, o)| o.len()).sum::<usize>(),
        manifest_path.display()
    );
    Ok(())
}

fn design_label(design: &SimDesign) -> String {
    match design.kind {
        ibart_core::sim::DesignKind::UnaryScreen { op } => format!("unary-{}", op.name()),
        ibart_core::sim::DesignKind::BinaryScreen { op } => format!("binary-{}", op.name()),
        ibart_core::sim::DesignKind::Complex => "complex".to_string(),
    }
}

fn summarize_screen(design: &SimDesign, outcomes: &[ScreenOutcome]) -> ScreenSummary {
    let tp_exactly_one = outcomes
        .iter()
        .filter(|o| o.metrics.true_positives == 1)
        .count();
    let mean_fp = outcomes
        .iter()
        .map(|o| o.metrics.false_positives as f64)
        .sum::<f64>()
        / outcomes.len().max(1) as f64;
    let co_selection_count = outcomes
        .iter()
        .filter_map(|o| o.co_selected_sub_absdiff)
        .fold(None, |acc: Option<usize>, co| {
            Some(acc.unwrap_or(0) + usize::from(co))
        });
    ScreenSummary {
        design: *design,
        replicates: outcomes.len(),
        tp_exactly_one,
        mean_fp,
        co_selection_count,
    }
}

fn summarize_complex(design: &SimDesign, outcomes: &[ComplexOutcome]) -> ComplexSummary {
    let tp_two = outcomes
        .iter()
        .filter(|o| o.metrics.true_positives == 2)
        .count();
    let mut f1s: Vec<f64> = outcomes.iter().map(|o| o.metrics.f1).collect();
    f1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_f1 = if f1s.is_empty() {
        0.0
    } else if f1s.len() % 2 == 1 {
        f1s[f1s.len() / 2]
    } else {
        0.5 * (f1s[f1s.len() / 2 - 1] + f1s[f1s.len() / 2])
    };
    let max_space = outcomes
        .iter()
        .flat_map(|o| o.space_log.iter().copied())
        .max()
        .unwrap_or(0);
    ComplexSummary {
        design: *design,
        replicates: outcomes.len(),
        tp_two,
        median_f1,
        max_space,
    }
}

fn write_replicates_csv(
    path: &Path,
    screens: &[ScreenOutcome],
    complex: &[(SimDesign, Vec<ComplexOutcome>)],
) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(
        w,
        "design,replicate,tp,fp,fn,precision,recall,f1,selected"
    )?;
    for o in screens {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            design_label(&o.design),
            o.replicate,
            o.metrics.true_positives,
            o.metrics.false_positives,
            o.metrics.false_negatives,
            o.metrics.precision,
            o.metrics.recall,
            o.metrics.f1,
            o.selected.join("|")
        )?;
    }
    for (design, outcomes) in complex {
        for o in outcomes {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                design_label(design),
                o.replicate,
                o.metrics.true_positives,
                o.metrics.false_positives,
                o.metrics.false_negatives,
                o.metrics.precision,
                o.metrics.recall,
                o.metrics.f1,
                o.selected.join("|")
            )?;
        }
    }
    Ok(())
}

/// Long-format rows ready for box plots: one (design, replicate, metric).
fn write_plot_data(
    path: &Path,
    screens: &[ScreenOutcome],
    complex: &[(SimDesign, Vec<ComplexOutcome>)],
) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "design,replicate,metric,value")?;
    let mut emit = |design: &str, replicate: usize, metric: &str, value: f64| {
        writeln!(w, "{design},{replicate},{metric},{value}")
    };
    for o in screens {
        let label = design_label(&o.design);
        emit(&label, o.replicate, "tp", o.metrics.true_positives as f64)?;
        emit(&label, o.replicate, "fp", o.metrics.false_positives as f64)?;
        emit(&label, o.replicate, "f1", o.metrics.f1)?;
    }
    for (design, outcomes) in complex {
        let label = design_label(design);
        for o in outcomes {
            emit(&label, o.replicate, "tp", o.metrics.true_positives as f64)?;
            emit(&label, o.replicate, "fp", o.metrics.false_positives as f64)?;
            emit(&label, o.replicate, "f1", o.metrics.f1)?;
            emit(
                &label,
                o.replicate,
                "max_space",
                o.space_log.iter().copied().max().unwrap_or(0) as f64,
            )?;
        }
    }
    Ok(())
}
