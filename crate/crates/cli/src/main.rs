use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlheat_cli::{list_presets, parse_config, preset, run_experiment, RunSummary};

#[derive(Parser)]
#[command(name = "nlheat", version, about = "Norm-preserving non-local heat flows on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run { config: PathBuf },
    /// Run a named preset (see `list-presets`).
    Preset {
        name: String,
        /// Output directory (defaults to the preset's own choice).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config overrides of the form section.key=value; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the preset catalog.
    ListPresets,
    /// Print the version.
    Version,
}

fn report(summary: &RunSummary) -> ExitCode {
    for c in &summary.checks {
        println!(
            "{}: {} (measured {:e}, threshold {:e}) — {}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.measured,
            c.threshold,
            c.detail
        );
    }
    println!("wall_seconds: {:.3}", summary.wall_seconds);
    for p in &summary.files {
        println!("wrote {}", p.display());
    }
    if summary.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run() -> Result<ExitCode, nlheat_core::Error> {
    match Cli::parse().command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            Ok(report(&run_experiment(&cfg)?))
        }
        Command::Preset {
            name,
            out,
            overrides,
        } => {
            let mut cfg = preset(&name)?;
            if let Some(dir) = out {
                cfg.output.dir = dir.display().to_string();
            }
            for ov in &overrides {
                let (key, value) = ov.split_once('=').ok_or_else(|| {
                    nlheat_core::Error::Config(format!("override `{ov}` must be key=value"))
                })?;
                cfg.set(key.trim(), value.trim(), 0)?;
            }
            cfg.validate()?;
            Ok(report(&run_experiment(&cfg)?))
        }
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(ExitCode::SUCCESS)
        }
        Command::Version => {
            println!("nlheat {}", env!("CARGO_PKG_VERSION"));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
