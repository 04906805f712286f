//! `aggdiff` command line: run experiments, fit decay rates from stored
//! series, run verification suites, and sweep config batches in parallel.
//!
//! Exit codes: 0 success; 1 a run violated an invariant or a check
//! failed; 2 usage errors (missing config file, unknown column, unknown
//! suite).

use std::path::PathBuf;
use std::process::ExitCode;

use aggdiff::rates::{fit_decay, Modifier};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use aggdiff_cli::checks;
use aggdiff_cli::config::FlatConfig;
use aggdiff_cli::presets;
use aggdiff_cli::runner::run_experiment;

#[derive(Parser)]
#[command(name = "aggdiff", about = "aggregation-diffusion solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Named built-in experiment.
    #[arg(long)]
    preset: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, repeatable (`--override solver.tau_end=5`).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for randomized diagnostics (shorthand for run.seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write series.csv, summary.json, and plots.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        /// Output directory (omit for a dry run without artifacts).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a decay rate to one column of a stored series.csv.
    Rates {
        /// Path to a series.csv produced by `run`.
        series: PathBuf,
        /// Column to fit.
        #[arg(long)]
        column: String,
        /// Fit window `lo:hi` in tau.
        #[arg(long, default_value = "0.5:4.0")]
        window: String,
        /// Algebraic factor divided out before the log-linear fit.
        #[arg(long, default_value = "none", value_parser = ["none", "div1ptau", "div1ptau2"])]
        modifier: String,
        /// Explicit plateau floor (default: estimated from the tail).
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Run a named verification suite.
    Check {
        /// Suite name.
        suite: String,
        /// Seed for randomized suites.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run several experiments in parallel, one subdirectory each.
    Sweep {
        /// Presets to include (repeatable).
        #[arg(long = "preset")]
        presets: Vec<String>,
        /// Config files to include (repeatable).
        #[arg(long = "config")]
        configs: Vec<PathBuf>,
        /// Overrides applied to every member (repeatable).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Parent output directory; each member writes to out/<name>/.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(source: &SourceArgs) -> Result<FlatConfig> {
    let mut flat = match (&source.preset, &source.config) {
        (Some(name), None) => presets::preset_config(name)?,
        (None, Some(path)) => FlatConfig::parse_file(path)?,
        (Some(_), Some(_)) => bail!("pass either --preset or --config, not both"),
        (None, None) => bail!("one of --preset or --config is required"),
    };
    for ov in &source.overrides {
        flat.apply_override(ov)?;
    }
    if let Some(seed) = source.seed {
        flat.set("run.seed", seed);
    }
    Ok(flat)
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("window must be `lo:hi`, got `{text}`"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn parse_modifier(name: &str) -> Modifier {
    match name {
        "div1ptau" => Modifier::DivBy1PlusTau,
        "div1ptau2" => Modifier::DivBy1PlusTauSq,
        _ => Modifier::None,
    }
}

fn cmd_run(source: &SourceArgs, out: Option<&PathBuf>) -> Result<u8> {
    let flat = load_config(source)?;
    let artifacts = run_experiment(&flat, out.map(PathBuf::as_path))?;
    println!("{}", serde_json::to_string_pretty(&artifacts.summary)?);
    if !artifacts.invariants_ok {
        eprintln!("invariant violation: see summary `invariants` block");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_rates(
    series: &PathBuf,
    column: &str,
    window: &str,
    modifier: &str,
    floor: Option<f64>,
) -> Result<u8> {
    let text = std::fs::read_to_string(series)
        .with_context(|| format!("cannot read series `{}`", series.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("empty series file"))?
        .split(',')
        .collect();
    let tau_idx = header
        .iter()
        .position(|&c| c == "tau")
        .ok_or_else(|| anyhow!("series has no tau column"))?;
    let col_idx = match header.iter().position(|&c| c == column) {
        Some(i) => i,
        None => bail!("unknown column `{column}` (available: {})", header.join(", ")),
    };
    let mut taus = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .ok_or_else(|| anyhow!("row {}: missing field {i}", lineno + 2))?
                .parse()
                .with_context(|| format!("row {}: bad float", lineno + 2))
        };
        taus.push(parse(tau_idx)?);
        values.push(parse(col_idx)?);
    }
    let fit = fit_decay(&taus, &values, parse_window(window)?, parse_modifier(modifier), floor)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(0)
}

fn cmd_check(suite: &str, seed: u64) -> Result<u8> {
    let items = checks::run_suite(suite, seed)?;
    let mut failed = 0usize;
    for item in &items {
        let status = if item.pass { "PASS" } else { "FAIL" };
        println!("{status} {suite}/{}: {}", item.name, item.detail);
        if !item.pass {
            failed += 1;
        }
    }
    println!(
        "{suite}: {}/{} checks passed",
        items.len() - failed,
        items.len()
    );
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_sweep(
    preset_names: &[String],
    config_paths: &[PathBuf],
    overrides: &[String],
    out: &PathBuf,
) -> Result<u8> {
    let mut jobs: Vec<(String, FlatConfig)> = Vec::new();
    for name in preset_names {
        jobs.push((name.clone(), presets::preset_config(name)?));
    }
    for path in config_paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("config")
            .to_string();
        jobs.push((stem, FlatConfig::parse_file(path)?));
    }
    if jobs.is_empty() {
        bail!("sweep needs at least one --preset or --config");
    }
    for (_, flat) in &mut jobs {
        for ov in overrides {
            flat.apply_override(ov)?;
        }
    }
    std::fs::create_dir_all(out)?;
    let results: Vec<(String, Result<bool>)> = jobs
        .par_iter()
        .map(|(name, flat)| {
            let dir = out.join(name);
            let res = run_experiment(flat, Some(&dir)).map(|a| a.invariants_ok);
            (name.clone(), res)
        })
        .collect();
    let mut code = 0u8;
    for (name, res) in &results {
        match res {
            Ok(true) => println!("OK   {name}"),
            Ok(false) => {
                println!("FAIL {name}: invariant violation");
                code = 1;
            }
            Err(e) => {
                println!("FAIL {name}: {e:#}");
                code = 1;
            }
        }
    }
    Ok(code)
}

/// Maps usage-level errors to exit code 2, everything else to 1.
fn usage_error(e: &anyhow::Error) -> bool {
    let text = format!("{e:#}");
    text.contains("config not found")
        || text.contains("unknown column")
        || text.contains("unknown check suite")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { source, out } => cmd_run(source, out.as_ref()),
        Command::Rates {
            series,
            column,
            window,
            modifier,
            floor,
        } => cmd_rates(series, column, window, modifier, *floor),
        Command::Check { suite, seed } => cmd_check(suite, *seed),
        Command::Sweep {
            presets,
            configs,
            overrides,
            out,
        } => cmd_sweep(presets, configs, overrides, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
