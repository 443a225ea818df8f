//! `ibart bart-select`: one screening pass over the columns of a CSV.

use crate::manifest::{to_json_file, RunManifest};
use crate::Ctx;
use anyhow::{Context, Result};
use clap::Args;
use ibart_core::bart::bart_fit;
use ibart_core::selectors::gse_select;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

#[derive(Args)]
pub struct BartSelectArgs {
    /// Predictor CSV (columns screened as-is; no descriptor generation).
    #[arg(long)]
    data: PathBuf,

    /// Response: a column name in the data CSV, or a single-column CSV path.
    #[arg(long)]
    response: String,

    /// Permutation count B.
    #[arg(long, default_value_t = 50)]
    permutations: usize,

    /// Simultaneous coverage level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Output JSON.
    #[arg(long)]
    out: PathBuf,

    /// Dump the observed fit's per-draw split-rule counts as CSV.
    #[arg(long)]
    debug_splits: Option<PathBuf>,
}

#[derive(Serialize)]
struct NamedGse {
    selected: Vec<String>,
    selected_indices: Vec<usize>,
    q: Vec<f64>,
    perm_mean: Vec<f64>,
    perm_sd: Vec<f64>,
    multiplier: f64,
    attainable: bool,
    permutations: usize,
    alpha: f64,
    observed_no_split: bool,
}

pub fn run(ctx: &Ctx, args: BartSelectArgs) -> Result<()> {
    let cfg_json = format!(
        "{{\"permutations\":{},\"alpha\":{}}}",
        args.permutations, args.alpha
    );
    let mut manifest = RunManifest::new("bart-select", ctx.seed, &cfg_json);
    manifest.add_input(&args.data)?;

    let (data, y) = super::load_xy(&args.data, &args.response)?;
    let bart = ctx.profile_bart.clone();
    let result = gse_select(&data.columns, &y, &bart, args.permutations, args.alpha)?;

    let named = NamedGse {
        selected: result
            .selected
            .iter()
            .map(|&i| data.names[i].clone())
            .collect(),
        selected_indices: result.selected.clone(),
        q: result.q.clone(),
        perm_mean: result.perm_mean.clone(),
        perm_sd: result.perm_sd.clone(),
        multiplier: result.multiplier,
        attainable: result.attainable,
        permutations: result.permutations,
        alpha: result.alpha,
        observed_no_split: result.observed_no_split,
    };
    to_json_file(&named, &args.out)?;
    manifest.add_output(&args.out);

    if let Some(debug_path) = &args.debug_splits {
        // Re-run the observed fit with count recording; the shared seed makes
        // it bitwise-identical to the fit inside the screen.
        let mut debug_cfg = bart.clone();
        debug_cfg.record_draw_counts = true;
        let fit = bart_fit(&data.columns, &y, &debug_cfg)?;
        let counts = fit.draw_split_counts.expect("recording was enabled");
        let file = std::fs::File::create(debug_path)
            .with_context(|| format!("creating {}", debug_path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "draw,{}", data.names.join(","))?;
        for (draw, row) in counts.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{},{}", draw, cells.join(","))?;
        }
        manifest.add_output(debug_path);
    }

    let manifest_path = manifest.write_next_to(&args.out, ctx.started.elapsed().as_secs_f64())?;
    println!(
        "selected {} of {} column(s) at C* = {:.4}; wrote {} and {}",
        named.selected.len(),
        data.names.len(),
        named.multiplier,
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}
