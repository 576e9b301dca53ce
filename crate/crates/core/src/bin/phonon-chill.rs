use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use phonon_chill::config::{parse_config, Command, Formats};
use phonon_chill::rates::LdConvention;
use phonon_chill::scenario::run;
use phonon_chill::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Rates,
    Steady,
    Transient,
    Toy,
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Lindblad,
    Text,
}

/// Cooling rates and phonon statistics of an oscillator coupled to a
/// driven dissipative qudit.
#[derive(Debug, Parser)]
#[command(name = "phonon-chill", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated list of csv, json.
    #[arg(long)]
    format: Option<String>,
    /// Add |α_ss|² to reported final excitations.
    #[arg(long)]
    alpha_ss_correction: bool,
    #[arg(long, value_enum)]
    ld_convention: Option<Convention>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Some(f) = cli.format {
        match f.parse::<Formats>() {
            Ok(f) => cfg.output.formats = f,
            Err(e) => {
                eprintln!("error: --format: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if cli.alpha_ss_correction {
        cfg.command.alpha_ss_correction = true;
    }
    if let Some(c) = cli.ld_convention {
        cfg.command.ld_convention = match c {
            Convention::Lindblad => LdConvention::Lindblad,
            Convention::Text => LdConvention::Text,
        };
    }
    let command = match cli.command {
        Cmd::Rates => Command::Rates,
        Cmd::Steady => Command::Steady,
        Cmd::Transient => Command::Transient,
        Cmd::Toy => Command::Toy,
        Cmd::Validate => Command::Validate,
    };
    match run(command, &cfg) {
        Ok(report) => {
            for f in &report.manifest.files {
                println!("{}", cfg.output.dir.join(f).display());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "validation failed, see {}",
                    cfg.output.dir.join("validation.json").display()
                );
                ExitCode::from(4)
            }
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
