//! `ibart evaluate`: the random-split train/test RMSE protocol.

use crate::manifest::{to_json_file, RunManifest};
use crate::Ctx;
use anyhow::{Context, Result};
use clap::Args;
use ibart_core::sim::{cross_validate_rmse, RmseConfig};
use std::io::Write;
use std::path::PathBuf;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Primary-data CSV.
    #[arg(long)]
    data: PathBuf,

    /// Response: a column name in the data CSV, or a single-column CSV path.
    #[arg(long)]
    response: String,

    /// Loop configuration JSON (same shape as `select`).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of random train/test splits.
    #[arg(long, default_value_t = 50)]
    splits: usize,

    /// Training fraction per split.
    #[arg(long, default_value_t = 0.9)]
    train_fraction: f64,

    /// Largest subset size to report.
    #[arg(long, default_value_t = 5)]
    k_max: usize,

    /// Output JSON (per-split rows plus per-k mean/SD).
    #[arg(long)]
    out: PathBuf,

    /// Also write long-format rows (split, k, rmse) for plotting.
    #[arg(long)]
    emit_plot_data: bool,
}

pub fn run(ctx: &Ctx, args: EvaluateArgs) -> Result<()> {
    let (pan_cfg, cfg_json) = super::select::effective_config(ctx, args.config.as_deref())?;
    let mut manifest = RunManifest::new("evaluate", ctx.seed, &cfg_json);
    manifest.add_input(&args.data)?;
    if let Some(path) = &args.config {
        manifest.add_input(path)?;
    }

    let (data, y) = super::load_xy(&args.data, &args.response)?;
    let rmse_cfg = RmseConfig {
        splits: args.splits,
        train_fraction: args.train_fraction,
        k_max: args.k_max,
        seed: ctx.seed,
    };
    let table = cross_validate_rmse(&data, &y, &pan_cfg, &rmse_cfg)?;

    to_json_file(&table, &args.out)?;
    manifest.add_output(&args.out);
    if args.emit_plot_data {
        let plot_path = args.out.with_extension("plot.csv");
        let file = std::fs::File::create(&plot_path)
            .with_context(|| format!("creating {}", plot_path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "split,k,rmse")?;
        for row in &table.rows {
            writeln!(w, "{},{},{}", row.split, row.k, row.rmse)?;
        }
        manifest.add_output(&plot_path);
    }
    let manifest_path = manifest.write_next_to(&args.out, ctx.started.elapsed().as_secs_f64())?;

    for summary in &table.per_k {
        println!(
            "k={}: mean rmse {:.4} (sd {:.4}, {} splits)",
            summary.k, summary.mean, summary.sd, summary.splits
        );
    }
    if table.failed_splits > 0 {
        println!(
            "note: {} split(s) skipped (descriptor evaluation failed on held-out rows)",
            table.failed_splits
        );
    }
    println!("wrote {} and {}", args.out.display(), manifest_path.display());
    Ok(())
}
