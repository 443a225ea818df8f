//! `ibart select`: the full iterative loop on a dataset.

use crate::manifest::{to_json_file, RunManifest};
use crate::Ctx;
use anyhow::{Context, Result};
use clap::Args;
use ibart_core::pan::{pan_run, PanConfig, PanResult};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct SelectArgs {
    /// Primary-data CSV.
    #[arg(long)]
    pub data: PathBuf,

    /// Response: a column name in the data CSV, or a single-column CSV path.
    #[arg(long)]
    pub response: String,

    /// Loop configuration JSON (fields mirror the library's PanConfig;
    /// omitted fields take defaults, with `bart` falling back to --profile).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Result JSON path.
    #[arg(long)]
    pub out: PathBuf,

    /// Optional human-readable report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Builds the effective PanConfig: file values win, --profile fills a missing
/// `bart` section, --seed always wins (it is the reproducibility root).
pub fn effective_config(ctx: &Ctx, config_path: Option<&Path>) -> Result<(PanConfig, String)> {
    let mut value = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<serde_json::Value>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => serde_json::json!({}),
    };
    if !value.is_object() {
        anyhow::bail!(ibart_core::Error::Invalid("config must be a JSON object".into()));
    }
    if value.get("bart").is_none() {
        value["bart"] = serde_json::to_value(&ctx.profile_bart)?;
    }
    let mut cfg: PanConfig = serde_json::from_value(value)
        .with_context(|| "config does not match the expected shape".to_string())?;
    cfg.seed = ctx.seed;
    cfg.bart.seed = ctx.seed;
    let effective_json = serde_json::to_string_pretty(&cfg)?;
    Ok((cfg, effective_json))
}

pub fn run(ctx: &Ctx, args: SelectArgs) -> Result<()> {
    let (cfg, cfg_json) = effective_config(ctx, args.config.as_deref())?;
    let mut manifest = RunManifest::new("select", ctx.seed, &cfg_json);
    manifest.add_input(&args.data)?;
    if let Some(path) = &args.config {
        manifest.add_input(path)?;
    }

    let (data, y) = super::load_xy(&args.data, &args.response)?;
    let result = pan_run(&data, &y, &cfg)?;

    to_json_file(&result, &args.out)?;
    manifest.add_output(&args.out);
    if let Some(report_path) = &args.report {
        write_report(&result, &data.names, report_path)?;
        manifest.add_output(report_path);
    }
    let manifest_path = manifest.write_next_to(&args.out, ctx.started.elapsed().as_secs_f64())?;
    println!(
        "selected {} descriptor(s) in {} iteration(s); wrote {} and {}",
        result.model.descriptors.len(),
        result.iterations_run,
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

fn write_report(result: &PanResult, names: &[String], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "scheme: {:?}", result.scheme_used)?;
    writeln!(w, "iterations: {}", result.iterations_run)?;
    writeln!(w, "space sizes: {:?}", result.space_log)?;
    writeln!(
        w,
        "max |correlation| per space: {:?}",
        result
            .rho_log
            .iter()
            .map(|r| (r * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    )?;
    writeln!(w)?;
    for row in &result.audit {
        writeln!(
            w,
            "iteration {}: screened {} columns (rho {:.4}), selected {}{}",
            row.iteration,
            row.space_size,
            row.rho,
            row.selected.len(),
            if row.carried_forward { " [carried forward]" } else { "" },
        )?;
        for name in &row.selected {
            writeln!(w, "    {name}")?;
        }
    }
    writeln!(w)?;
    writeln!(
        w,
        "lasso: {} descriptor(s) at lambda {:.6e}",
        result.lasso.selected.len(),
        result.lasso.chosen_lambda
    )?;
    if let Some(l0) = &result.l0 {
        writeln!(w, "subset table (AIC):")?;
        for (i, row) in l0.table.iter().enumerate() {
            writeln!(
                w,
                "    k={} aic={:.3}{}",
                row.k,
                row.aic,
                if i == l0.chosen { "  <- chosen" } else { "" }
            )?;
        }
    }
    writeln!(w)?;
    writeln!(w, "final model (aic {:.3}):", result.model.aic)?;
    writeln!(w, "    intercept: {:.6}", result.model.coefficients[0])?;
    for (d, coef) in result
        .model
        .descriptors
        .iter()
        .zip(result.model.coefficients.iter().skip(1))
    {
        writeln!(
            w,
            "    {:+.6} * {}    [{}]",
            coef,
            d.canonical_string(),
            d.display_with_names(names)
        )?;
    }
    writeln!(w, "elapsed: {:.1}s", result.elapsed_secs)?;
    Ok(())
}
