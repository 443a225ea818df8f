//! `ibart generate`: evaluate one descriptor-space expansion to CSV.

use crate::manifest::RunManifest;
use crate::Ctx;
use anyhow::{Context, Result};
use clap::Args;
use ibart_core::data::Dataset;
use ibart_core::descriptor::{BINARY_OPS, UNARY_OPS};
use ibart_core::space::{DescriptorSpace, GenOptions, DEFAULT_DEDUP_THRESHOLD};
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum OpSet {
    /// Identity only: echo the input space.
    None,
    Unary,
    Binary,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Primary-data CSV (header row, optional `#units:` second row).
    #[arg(long)]
    data: PathBuf,

    /// Operator set to apply.
    #[arg(long, value_enum, default_value = "unary")]
    ops: OpSet,

    /// Output CSV of evaluated columns (canonical-string headers).
    #[arg(long)]
    out: PathBuf,

    /// Optional descriptor listing (descriptor, complexity, origin, units).
    #[arg(long)]
    list: Option<PathBuf>,

    /// Absolute-correlation dedup threshold.
    #[arg(long, default_value_t = DEFAULT_DEDUP_THRESHOLD)]
    dedup_threshold: f64,

    /// Skip correlation dedup entirely.
    #[arg(long)]
    no_dedup: bool,

    /// Drop descriptors violating unit rules (needs a `#units:` row).
    #[arg(long)]
    unit_filter: bool,

    /// Magnitude cap: |value| beyond this is a domain violation.
    #[arg(long, default_value_t = 1e8)]
    cap: f64,

    /// Row-buffer budget for the output writer, in mebibytes.
    #[arg(long, default_value_t = 64)]
    write_buffer_mb: usize,
}

pub fn run(ctx: &Ctx, args: GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("generate", ctx.seed, &format!("{:?}", args_summary(&args)));
    manifest.add_input(&args.data)?;

    let data = Dataset::read_csv(&args.data)?;
    let base = DescriptorSpace::from_dataset(&data);
    let opts = GenOptions {
        magnitude_cap: args.cap,
        dedup_threshold: (!args.no_dedup).then_some(args.dedup_threshold),
        unit_filter: args.unit_filter,
        origin: 1,
    };
    let (space, report) = match args.ops {
        OpSet::None => base.generate_unary(&[], &opts)?,
        OpSet::Unary => base.generate_unary(&UNARY_OPS, &opts)?,
        OpSet::Binary => base.generate_binary(&BINARY_OPS, &opts)?,
    };

    write_space_csv(&space, &args.out, args.write_buffer_mb)?;
    manifest.add_output(&args.out);
    if let Some(list) = &args.list {
        write_descriptor_list(&space, list)?;
        manifest.add_output(list);
    }

    println!(
        "generated {} columns ({} emitted, {} domain-dropped, {} dedup-dropped, {} constant, {} unit-dropped)",
        space.len(),
        report.emitted,
        report.domain_dropped,
        report.dedup_dropped,
        report.constant_dropped,
        report.unit_dropped
    );
    for name in &report.constant_notices {
        println!("note: removed constant column {name}");
    }
    let path = manifest.write_next_to(&args.out, ctx.started.elapsed().as_secs_f64())?;
    println!("wrote {} and {}", args.out.display(), path.display());
    Ok(())
}

fn args_summary(args: &GenerateArgs) -> Vec<String> {
    vec![
        format!("data={}", args.data.display()),
        format!("ops={}", match args.ops {
            OpSet::None => "none",
            OpSet::Unary => "unary",
            OpSet::Binary => "binary",
        }),
        format!("dedup={}", if args.no_dedup { "off".into() } else { args.dedup_threshold.to_string() }),
        format!("unit_filter={}", args.unit_filter),
        format!("cap={}", args.cap),
    ]
}

/// Streams the evaluated space row by row so no row-major copy of the matrix
/// is ever materialized, whatever its size.
fn write_space_csv(space: &DescriptorSpace, path: &PathBuf, buffer_mb: usize) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let writer = std::io::BufWriter::with_capacity(buffer_mb.max(1) * 1024 * 1024, file);
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(space.descriptors().iter().map(|d| d.canonical_string()))?;
    let mut record = Vec::with_capacity(space.len());
    for row in 0..space.n_rows() {
        record.clear();
        for col in space.columns() {
            record.push(format_float(col[row]));
        }
        csv_writer.write_record(&record)?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Shortest round-trip representation keeps outputs byte-stable.
fn format_float(v: f64) -> String {
    format!("{v}")
}

fn write_descriptor_list(space: &DescriptorSpace, path: &PathBuf) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "descriptor,complexity,origin,units")?;
    for i in 0..space.len() {
        let d = space.descriptor(i);
        let units = match d.units() {
            ibart_core::descriptor::DescriptorUnits::Consistent(u) => u.to_string(),
            ibart_core::descriptor::DescriptorUnits::Violated => "violated".to_string(),
        };
        writeln!(w, "{},{},{},{}", d.canonical_string(), d.complexity(), space.origin(i), units)?;
    }
    Ok(())
}
