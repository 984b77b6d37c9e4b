use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use srlaser::cli::{execute, Command, RunConfig};

#[derive(Parser)]
#[command(name = "srlaser", version, about = "Superradiant bad-cavity laser simulator")]
struct Args {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set params.pump=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (same as `--set output.dir=...`).
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Exact stationary state, power and stability (steady.json).
    Steady,
    /// Time integration of the moment equations (trajectory.csv).
    Dynamics,
    /// Stationary emission spectrum (spectrum.csv, pulling.csv).
    Spectrum,
    /// Power and linewidth maps over the (w, N) grid.
    Sweep,
    /// Exact small-N master equation versus the moment equations.
    Oracle,
    /// Pump thresholds and critical atom number (thresholds.json).
    Thresholds,
    /// Every product listed in `output.products`.
    Run,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Steady => Command::Steady,
            Cmd::Dynamics => Command::Dynamics,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Sweep => Command::Sweep,
            Cmd::Oracle => Command::Oracle,
            Cmd::Thresholds => Command::Thresholds,
            Cmd::Run => Command::Run,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut overrides = args.overrides.clone();
    if let Some(out) = &args.out {
        overrides.push(format!("output.dir={}", toml::Value::String(out.display().to_string())));
    }
    let result = RunConfig::load(args.config.as_deref(), &overrides).and_then(|cfg| execute(args.command.into(), &cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut summary = json!({ "error": e.code(), "message": e.to_string() });
            if let srlaser::Error::UnknownKeys(keys) = &e {
                summary["keys"] = json!(keys);
            }
            eprintln!("{summary}");
            ExitCode::from(2)
        }
    }
}
