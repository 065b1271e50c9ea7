//! `bpi`: runs exact scans, Monte Carlo scans, constant tables and the
//! verification suites, writing `results.csv` and `report.json`.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bpi_core::montecarlo::Method;
use bpi_core::Law;
use config::{ExperimentConfig, Kind};

const SCAN_SCHEMA: &str = "results.csv: model,n,x,method,estimate,stderr,ci_lo,ci_hi,theory_denominator,ratio,const_ld";

#[derive(Parser)]
#[command(name = "bpi", version, about = "Tail experiments for branching processes with immigration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limit constants with their formulas.
    #[command(after_help = "results.csv: name,tag,value,provenance")]
    Constants(Common),
    /// Exact ratios P(S_n − d_n > x)/(n P(driver > x)), or lower deviations with --lower.
    #[command(name = "exact-scan", after_help = SCAN_SCHEMA)]
    ExactScan(Common),
    /// Monte Carlo ratios, same columns as exact-scan.
    #[command(name = "mc-scan", after_help = SCAN_SCHEMA)]
    McScan(Common),
    /// Exact interval against Monte Carlo estimate; fails when max |z| ≥ 4.
    #[command(after_help = "results.csv: model,n,x,method,exact_lo,exact_hi,estimate,stderr,z")]
    Compare(Common),
    /// Property suites: all, regvar, process, exact, asymptotics, montecarlo.
    #[command(after_help = "results.csv: check,pass,detail")]
    Verify(Common),
}

/// Flags mirror the config keys and override values read from `--config`.
#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    offspring: Option<Law>,
    #[arg(long)]
    immigration: Option<Law>,
    /// Comma-separated generation counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Comma-separated absolute x values.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<f64>>,
    /// Comma-separated multipliers of the threshold x_n.
    #[arg(long, value_delimiter = ',')]
    x_multipliers: Option<Vec<f64>>,
    /// δ of x_n = n^(δ+1/κ) when κ ≤ 2, a of x_n = √(a n ln n) otherwise.
    #[arg(long)]
    threshold_param: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    /// PLAIN or BIGJUMP.
    #[arg(long)]
    method: Option<Method>,
    /// Scan P(S_n − d_n ≤ −x) instead of the upper tail.
    #[arg(long)]
    lower: bool,
    #[arg(long)]
    suite: Option<String>,
}

impl Common {
    fn overrides(&self) -> ExperimentConfig {
        ExperimentConfig {
            offspring: self.offspring.clone(),
            immigration: self.immigration.clone(),
            kind: None,
            n: self.n.clone(),
            x: self.x.clone(),
            x_multipliers: self.x_multipliers.clone(),
            threshold_param: self.threshold_param,
            cutoff: self.cutoff,
            tol: self.tol,
            budget: self.budget,
            seed: self.seed,
            method: self.method,
            lower: self.lower.then_some(true),
            suite: self.suite.clone(),
            out: self.out.clone(),
        }
    }
}

fn load(kind: Kind, common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    cfg.overlay(common.overrides());
    cfg.kind = Some(kind);
    Ok(cfg)
}

/// Returns whether every assertion passed.
fn execute(kind: Kind, common: &Common) -> Result<bool> {
    let cfg = load(kind, common)?;
    let start = Instant::now();
    let outcome = run::dispatch(kind, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("results.csv"), &outcome.csv).context("writing results.csv")?;
    let all_pass = outcome.assertions.iter().all(|a| a.pass);
    let assertions: Vec<_> = outcome
        .assertions
        .iter()
        .map(|a| json!({ "name": a.name, "pass": a.pass, "detail": a.detail }))
        .collect();
    let report = json!({
        "kind": kind.as_str(),
        "config": cfg.to_string(),
        "result": outcome.report,
        "assertions": assertions,
        "pass": all_pass,
        "wall_clock_seconds": elapsed,
    });
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")
        .context("writing report.json")?;
    for a in &outcome.assertions {
        println!("{} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Constants(c) => (Kind::Constants, c),
        Command::ExactScan(c) => (Kind::ExactScan, c),
        Command::McScan(c) => (Kind::McScan, c),
        Command::Compare(c) => (Kind::Compare, c),
        Command::Verify(c) => (Kind::Verify, c),
    };
    match execute(kind, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
