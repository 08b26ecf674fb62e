use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pimac_expcli::{run_experiment, ExperimentConfig, ExperimentId, Grid, Mode, RunError};

/// Runs one PIMAC experiment and writes CSV rows plus a JSON summary.
#[derive(Parser, Debug)]
#[command(name = "pimac", version)]
struct Cli {
    #[arg(long, value_enum)]
    experiment: Option<ExperimentId>,
    /// H1, H2, H1+Hprime, H1+Hprime(J) or a channel file.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, value_enum, default_value = "all")]
    mode: Mode,
    /// Decoding order: 1 decodes MAC user 1 first, 2 decodes user 2 first.
    #[arg(long)]
    order: Option<usize>,
    /// Symbol extension length of the extended runs.
    #[arg(long = "extension", default_value_t = 3)]
    extension: usize,
    /// `lo:hi:step` or `a,b,c`.
    #[arg(long)]
    grid: Option<Grid>,
    /// Rate profile `a1,a2,a3`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    alpha: Option<Vec<f64>>,
    /// User counts for the multiuser experiment.
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<usize>>,
    #[arg(long, env = "PIMAC_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML file whose fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn config(cli: Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = ExperimentConfig::new(cli.experiment.unwrap_or(ExperimentId::RateRegion));
    cfg.channel = cli.channel;
    cfg.mode = cli.mode;
    cfg.order = cli.order;
    cfg.extension = cli.extension;
    cfg.grid = cli.grid;
    cfg.alpha = cli.alpha.map(|a| [a[0], a[1], a[2]]);
    if let Some(u) = cli.users {
        cfg.users = u;
    }
    cfg.seed = cli.seed;
    cfg.out = cli.out;
    if let Some(path) = cli.config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_toml(&text)?;
    } else if cli.experiment.is_none() {
        return Err(RunError::Config("--experiment is required without --config".into()));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let result = config(Cli::parse()).and_then(|cfg| {
        let report = run_experiment(&cfg)?;
        println!("{} on {}: {} rows in {:.1} s", report.experiment, report.channel, report.rows.len(), report.elapsed_seconds);
        for c in &report.checks {
            let value = c.value.map_or("none".to_string(), |v| format!("{v:.6}"));
            println!("  {} {}: {} (target {})", if c.pass { "PASS" } else { "FAIL" }, c.name, value, c.target);
        }
        if !report.audit_ok() {
            println!("  audit: some feasible rows have slack below -1e-6");
        }
        println!("  wrote {}", cfg.out.join(report.stem()).display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
