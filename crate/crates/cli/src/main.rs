use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use tailrisk::harness::{run_with_threads, write_outputs, ClassKind, Experiment, ExperimentConfig, LossKind};

/// Heavy-tailed CVaR experiments.
#[derive(Parser, Debug)]
#[command(name = "tailrisk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat `key = value` config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for rows.csv, summary.json and resolved_config.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "TAILRISK_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ErmArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = ["finite", "net"])]
    class: Option<String>,
    #[arg(long, value_parser = ["abs", "sq", "flip"])]
    loss: Option<String>,
    #[arg(long, value_parser = ["emp", "trunc", "tmom"])]
    objective: Option<String>,
    /// CSV with `x*` feature columns and a `y` column.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point estimates on repeated samples.
    Estimate(Common),
    /// Error against sample size.
    RateSweep(Common),
    /// Error against contamination level.
    ContamSweep(Common),
    /// CVaR minimization over a hypothesis class.
    Erm(ErmArgs),
    /// Bahadur-Kiefer decomposition of the empirical CVaR.
    Bk(Common),
    /// Threshold deviation and stability.
    Stability(Common),
    /// Influence function of the CVaR decision.
    Ifcheck(Common),
    /// Tail-scarcity decision flips.
    Flip(Common),
    /// Error against sample size on a mixing chain.
    DepSweep(Common),
}

fn load(experiment: Experiment, common: &Common) -> tailrisk::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| tailrisk::Error::Io {
                path: path.clone(),
                source,
            })?;
            ExperimentConfig::parse_for(&text, Some(experiment))?
        }
        None => ExperimentConfig::new(experiment),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn resolve(command: Command) -> tailrisk::Result<(ExperimentConfig, Common)> {
    let (experiment, common) = match &command {
        Command::Estimate(c) => (Experiment::Estimate, c),
        Command::RateSweep(c) => (Experiment::RateSweep, c),
        Command::ContamSweep(c) => (Experiment::ContamSweep, c),
        Command::Erm(a) => (Experiment::Erm, &a.common),
        Command::Bk(c) => (Experiment::Bk, c),
        Command::Stability(c) => (Experiment::Stability, c),
        Command::Ifcheck(c) => (Experiment::IfCheck, c),
        Command::Flip(c) => (Experiment::Flip, c),
        Command::DepSweep(c) => (Experiment::DepSweep, c),
    };
    let mut cfg = load(experiment, common)?;
    if let Command::Erm(a) = &command {
        match a.class.as_deref() {
            Some("finite") => cfg.erm.class = ClassKind::Finite,
            Some("net") => cfg.erm.class = ClassKind::Net,
            _ => {}
        }
        match a.loss.as_deref() {
            Some("abs") => cfg.erm.loss = LossKind::Abs,
            Some("sq") => cfg.erm.loss = LossKind::Sq,
            Some("flip") => cfg.erm.loss = LossKind::Flip,
            _ => {}
        }
        if let Some(o) = &a.objective {
            cfg.erm.objective = o.parse()?;
        }
        if let Some(d) = &a.data {
            cfg.erm.data = Some(d.clone());
        }
    }
    Ok((cfg, common.clone()))
}

fn execute(command: Command) -> tailrisk::Result<Option<bool>> {
    let (cfg, common) = resolve(command)?;
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let start = Instant::now();
    let report = run_with_threads(&cfg, threads)?;
    let wall = start.elapsed().as_secs_f64();
    let pass = report.pass();
    let slope = report.fitted_slope.map_or("-".to_string(), |s| format!("{s:.4}"));
    let target = report.target.map_or("-".to_string(), |t| format!("{t:.4}"));
    println!(
        "{}: slope {slope} target {target} pass {} ({wall:.1}s, {} failed replications)",
        cfg.experiment.as_str(),
        pass.map_or("n/a", |p| if p { "yes" } else { "no" }),
        report.failures
    );
    for c in &report.checks {
        println!("  {}: {} ({})", c.name, if c.pass { "ok" } else { "FAIL" }, c.detail);
    }
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.as_str()));
    for p in write_outputs(&dir, &cfg, &report, wall)? {
        info!("wrote {}", p.display());
    }
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Some(false)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
