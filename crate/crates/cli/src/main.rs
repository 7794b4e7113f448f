//! `zeno`: filter functions, decay-rate curves, regimes, figure datasets and
//! oracle reports.
//!
//! Exit status: 0 success, 1 invalid values or a failed threshold check,
//! 2 usage error. `ZENO_WORKERS` sets the number of worker threads.

mod args;
mod commands;
mod config;
mod error;
mod figures;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{quad_config, Cli, Cmd};
use config::Command;
use error::CliError;

const WORKERS_ENV: &str = "ZENO_WORKERS";

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    zeno_core::exec::set_workers(n).map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}")))
}

fn execute(cmd: Cmd) -> Result<bool, CliError> {
    let cfg = match &cmd {
        Cmd::Filter(a) => commands::filter_config(a)?,
        Cmd::Gamma(a) => commands::curve_config(a, Command::Gamma)?,
        Cmd::Regimes(a) => commands::curve_config(a, Command::Regimes)?,
        Cmd::Oracle(a) => commands::oracle_config(a)?,
        Cmd::Rerun(a) => {
            let mut cfg = commands::load_config(&a.config)?;
            if a.out.is_some() {
                cfg.output.path = a.out.clone();
            }
            cfg
        }
        Cmd::Figure(a) => {
            let fig = figures::figure(a.id, a.format, a.precision, quad_config(a.rel_tol)?)?;
            let dir = a
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("figure-{}", a.id)));
            figures::write_figure(&fig, &dir)?;
            return Ok(true);
        }
    };
    let outcome = commands::run(&cfg)?;
    commands::emit(&cfg, &outcome.table.render(&cfg)?)?;
    if outcome.threshold_failed {
        eprintln!("zeno: at least one row exceeds the gap threshold");
    }
    Ok(!outcome.threshold_failed)
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let result = configure_workers().and_then(|()| execute(cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("zeno: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
