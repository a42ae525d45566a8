//! Command-line entry points: run, compare, sweep, synth.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::engine::{
    load_inputs, run_backtest, run_comparison, threshold_sweep, BacktestConfig, ComparisonResult,
};
use crate::error::Error;
use crate::strategy::Thresholds;
use crate::synth::{generate_synthetic_dataset, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sentibt",
    about = "News-sentiment trading backtester",
    long_about = "Daily backtesting of news-sentiment trading signals against a Buy&Hold \
                  benchmark.\n\nDefaults follow the reference setup: SELL/BUY thresholds 40/60, \
                  initial capital $300,000, order value $10,000, commission 0.05%.\n\nExit codes: \
                  0 success, 2 usage/config error, 3 data error. The SENTIBT_DEFAULT_TZ \
                  environment variable overrides the default market timezone \
                  (America/New_York)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Suppress log output
    #[arg(long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    /// Verbose log output
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct RunManifest {
    /// Run config JSON (thresholds default 40/60, capital $300,000,
    /// order value $10,000, commission rate 0.0005)
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory (created if absent)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one backtest and write the result directory
    Run(RunManifest),
    /// Run >= 2 variants sharing horizon/universe and emit the comparison table
    Compare(RunManifest),
    /// Re-run the engine across threshold pairs and tabulate fill counts
    Sweep {
        #[command(flatten)]
        manifest: RunManifest,
        /// Threshold pair as SELL,BUY (repeatable), e.g. --pair 45,55 --pair 40,60
        #[arg(long = "pair", value_name = "SELL,BUY")]
        pairs: Vec<String>,
    },
    /// Generate a seeded synthetic dataset (prices.csv + scores.csv)
    Synth {
        #[command(flatten)]
        manifest: RunManifest,
        /// RNG seed; identical seeds produce identical files
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Contract(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn fail(err: Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(&err)
}

pub fn cmd_run(manifest: &RunManifest) -> i32 {
    let cfg = match BacktestConfig::load(&manifest.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let inputs = match load_inputs(&cfg) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let result = match run_backtest(&cfg, &inputs) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = result.write_dir(&manifest.out) {
        return fail(e);
    }
    log::info!("wrote result directory {}", manifest.out.display());
    EXIT_OK
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareConfig {
    #[serde(default)]
    benchmark: Option<String>,
    variants: Vec<CompareVariant>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareVariant {
    name: String,
    config: BacktestConfig,
}

fn write_comparison(cmp: &ComparisonResult, out: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;

    // metrics table, one column per variant, Table-1 row order
    let names: Vec<&String> = cmp.reports.keys().collect();
    let mut table = String::from("metric");
    for n in &names {
        table.push(',');
        table.push_str(n);
    }
    table.push('\n');
    let row_names = [
        "Annual Return",
        "Annual Compound Return",
        "Annual Cumulative Return",
        "Calmar Ratio",
        "Sharpe Ratio",
        "Sortino Ratio",
        "MDD",
        "Annual Volatility",
        "95% Daily VaR",
        "Alpha",
    ];
    let per_variant: BTreeMap<&String, Vec<String>> = cmp
        .reports
        .iter()
        .map(|(n, r)| {
            let csv = r.to_csv();
            let cells: Vec<String> = csv
                .lines()
                .skip(1)
                .map(|l| l.split_once(',').map_or("", |x| x.1).to_string())
                .collect();
            (n, cells)
        })
        .collect();
    for (i, row) in row_names.iter().enumerate() {
        table.push_str(row);
        for n in &names {
            table.push(',');
            table.push_str(&per_variant[*n][i]);
        }
        table.push('\n');
    }
    std::fs::write(out.join("comparison.csv"), table)
        .map_err(|e| Error::io(out.display().to_string(), e))?;

    let json = serde_json::to_string_pretty(&cmp.reports)
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out.join("comparison.json"), json)
        .map_err(|e| Error::io(out.display().to_string(), e))?;

    for (name, series) in &cmp.cumulative_series {
        let mut csv = String::from("date,cumulative_return_pct\n");
        for (d, v) in series {
            csv.push_str(&format!("{d},{v}\n"));
        }
        std::fs::write(out.join(format!("cumulative_{name}.csv")), csv)
            .map_err(|e| Error::io(out.display().to_string(), e))?;
    }
    for (name, series) in &cmp.monthly_series {
        let mut csv = String::from("period_end,compound_return\n");
        for (d, v) in series {
            csv.push_str(&format!("{d},{v}\n"));
        }
        std::fs::write(out.join(format!("monthly_{name}.csv")), csv)
            .map_err(|e| Error::io(out.display().to_string(), e))?;
    }
    for (name, result) in &cmp.results {
        result.write_dir(&out.join(name))?;
    }
    Ok(())
}

pub fn cmd_compare(manifest: &RunManifest) -> i32 {
    let text = match std::fs::read_to_string(&manifest.config) {
        Ok(t) => t,
        Err(e) => return fail(Error::io(manifest.config.display().to_string(), e)),
    };
    let cfg: CompareConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => return fail(Error::Config(e.to_string())),
    };
    if cfg.variants.len() < 2 {
        return fail(Error::Config(format!(
            "compare needs at least 2 variants, got {}",
            cfg.variants.len()
        )));
    }
    let variants: Vec<(String, BacktestConfig)> = cfg
        .variants
        .into_iter()
        .map(|v| (v.name, v.config))
        .collect();
    let cmp = match run_comparison(&variants, cfg.benchmark.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_comparison(&cmp, &manifest.out) {
        return fail(e);
    }
    EXIT_OK
}

fn parse_pair(raw: &str) -> crate::Result<(f64, f64)> {
    let parts: Vec<&str> = raw.split([',', ':']).collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "pair {raw:?} must be SELL,BUY (e.g. 40,60)"
        )));
    }
    let sell: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad sell threshold {:?}", parts[0])))?;
    let buy: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad buy threshold {:?}", parts[1])))?;
    Thresholds::new(sell, buy).map_err(|e| Error::Config(e.to_string()))?;
    Ok((sell, buy))
}

pub fn cmd_sweep(manifest: &RunManifest, raw_pairs: &[String]) -> i32 {
    if raw_pairs.is_empty() {
        return fail(Error::Config("sweep needs at least one --pair".into()));
    }
    let mut pairs = Vec::new();
    for raw in raw_pairs {
        match parse_pair(raw) {
            Ok(p) => pairs.push(p),
            Err(e) => return fail(e),
        }
    }
    let cfg = match BacktestConfig::load(&manifest.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let inputs = match load_inputs(&cfg) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let rows = match threshold_sweep(&cfg, &inputs, &pairs) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::create_dir_all(&manifest.out) {
        return fail(Error::io(manifest.out.display().to_string(), e));
    }
    let mut csv = String::from("sell_signal,buy_signal,transaction_count\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            row.sell_signal, row.buy_signal, row.transaction_count
        ));
    }
    if let Err(e) = std::fs::write(manifest.out.join("sweep.csv"), csv) {
        return fail(Error::io(manifest.out.display().to_string(), e));
    }
    match serde_json::to_string_pretty(&rows) {
        Ok(json) => {
            if let Err(e) = std::fs::write(manifest.out.join("sweep.json"), json) {
                return fail(Error::io(manifest.out.display().to_string(), e));
            }
        }
        Err(e) => return fail(Error::Config(e.to_string())),
    }
    EXIT_OK
}

pub fn cmd_synth(manifest: &RunManifest, seed: u64) -> i32 {
    let text = match std::fs::read_to_string(&manifest.config) {
        Ok(t) => t,
        Err(e) => return fail(Error::io(manifest.config.display().to_string(), e)),
    };
    let spec: SynthSpec = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => return fail(Error::Config(e.to_string())),
    };
    // spec problems are configuration mistakes here
    if let Err(e) = spec.validate() {
        return fail(Error::Config(e.to_string()));
    }
    let dataset = match generate_synthetic_dataset(seed, &spec) {
        Ok(d) => d,
        Err(e) => return fail(Error::Config(e.to_string())),
    };
    if let Err(e) = std::fs::create_dir_all(&manifest.out) {
        return fail(Error::io(manifest.out.display().to_string(), e));
    }
    if let Err(e) = dataset.write_files(
        &manifest.out.join("prices.csv"),
        &manifest.out.join("scores.csv"),
    ) {
        return fail(e);
    }
    EXIT_OK
}

pub fn dispatch(cli: Cli) -> i32 {
    let level = if cli.quiet {
        "off"
    } else if cli.verbose {
        "debug"
    } else {
        "warn"
    };
    let _ = env_logger::Builder::new().parse_filters(level).try_init();
    match &cli.command {
        Command::Run(m) => cmd_run(m),
        Command::Compare(m) => cmd_compare(m),
        Command::Sweep { manifest, pairs } => cmd_sweep(manifest, pairs),
        Command::Synth { manifest, seed } => cmd_synth(manifest, *seed),
    }
}
