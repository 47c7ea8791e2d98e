use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rgrasp::{dataset_stats, generate_synthetic, parse_libsvm, write_svmlight, SyntheticSpec};
use rgrasp_bench::{emit_csv, parse_config, parse_synthetic, run_experiment};

#[derive(Parser)]
#[command(name = "bench", about = "Sparsity-constrained solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write a metrics CSV.
    Run {
        /// Experiment description file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset in SVMlight format.
    Gen {
        /// Generator description file.
        #[arg(long)]
        spec: PathBuf,
        /// Output dataset path; the planted signal goes to `<out>.truth`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary statistics for an SVMlight/LIBSVM file.
    Stats {
        /// Dataset path.
        #[arg(long)]
        data: PathBuf,
        /// Treat the dataset as having at least this many features.
        #[arg(long)]
        dim: Option<usize>,
    },
}

fn main() -> anyhow::Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Run { config, out } => run(&config, out),
        Command::Gen { spec, out } => gen(&spec, &out),
        Command::Stats { data, dim } => stats(&data, dim),
    }
}

fn run(config: &Path, out: Option<PathBuf>) -> anyhow::Result<()> {
    let text =
        std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = parse_config(&text, &config.display().to_string())?;
    let Some(out) = out.or_else(|| cfg.out.clone()) else {
        bail!("no output path: pass --out or set `out` in the config");
    };
    let rows = run_experiment(&cfg)?;
    std::fs::write(&out, emit_csv(&rows)).with_context(|| format!("writing {}", out.display()))?;
    log::info!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn gen(spec: &Path, out: &Path) -> anyhow::Result<()> {
    let text =
        std::fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
    let parsed: SyntheticSpec = parse_synthetic(&text, &spec.display().to_string())?;
    let (data, truth) = generate_synthetic(&parsed)?;
    write_svmlight(&data, out)?;

    let truth_path = out.with_extension(match out.extension() {
        Some(ext) => format!("{}.truth", ext.to_string_lossy()),
        None => "truth".to_string(),
    });
    let mut lines = String::new();
    for &k in truth.support.iter() {
        lines.push_str(&format!("{} {}\n", k + 1, truth.x_star.as_slice()[k]));
    }
    std::fs::write(&truth_path, lines)
        .with_context(|| format!("writing {}", truth_path.display()))?;

    println!("{}", dataset_stats(&data));
    println!(
        "truth: {} nonzeros -> {}",
        truth.support.len(),
        truth_path.display()
    );
    Ok(())
}

fn stats(data: &Path, dim: Option<usize>) -> anyhow::Result<()> {
    let parsed = parse_libsvm(data, dim)?;
    println!("{}", dataset_stats(&parsed));
    Ok(())
}
