mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::{Outcome, Status};
use config::{merge, schema_for};
use error::CliError;

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.config.as_deref();
    let name = cli.command.name();
    match &cli.command {
        Command::Phi(a) => commands::phi(merge(name, cfg, a)?),
        Command::Pressure(a) => commands::pressure(merge(name, cfg, a)?),
        Command::Qdim(a) => commands::qdim(merge(name, cfg, a)?),
        Command::Sdim(a) => commands::sdim(merge(name, cfg, a)?),
        Command::Lsr(a) => commands::lsr(merge(name, cfg, a)?),
        Command::Resist(a) => commands::resist(merge(name, cfg, a)?),
        Command::Chaos(a) => commands::chaos(merge(name, cfg, a)?),
        Command::Moments(a) => commands::moments(merge(name, cfg, a)?),
        Command::Witness(a) => commands::witness(merge(name, cfg, a)?),
        Command::DiscontinuityScan(a) => commands::scan(merge(name, cfg, a)?),
    }
}

fn emit(cli: &Cli, out: &Outcome) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    if let Some((csv, Some(path))) = &out.csv {
        std::fs::write(path, csv)?;
    }
    if cli.json {
        let doc = json!({
            "schema": schema_for(cli.command.name()),
            "command": cli.command.name(),
            "status": out.status,
            "result": out.result,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(stdout, "{text}")?;
    } else {
        write!(stdout, "{}", out.text)?;
        match out.status {
            Status::Ok => {}
            Status::Unresolved => writeln!(stdout, "status: unresolved (certified bounds above are partial)")?,
            Status::BudgetExceeded => writeln!(stdout, "status: shortened to fit the word budget")?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(&cli).and_then(|out| {
        emit(&cli, &out)?;
        Ok(out.status)
    });
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(3),
        Err(e) => {
            eprintln!("fdl {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
