mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format, Settings};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag, config entry or out-of-range input; exit 2.
    Usage(String),
    /// Failure after validation; exit 1.
    Compute(String),
    /// `verify` ran but some check failed; exit 1.
    ChecksFailed,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
            CliError::ChecksFailed => f.write_str("verification failed"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::ChecksFailed => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = Settings::resolve(cli.common)?;
    match cli.command {
        Command::Transmit(a) => commands::transmit(&settings, a),
        Command::Sweep(a) => commands::sweep(&settings, a),
        Command::Resonances(a) => commands::resonances(&settings, a),
        Command::Sidebands(a) => commands::sidebands(&settings, a),
        Command::Verify(a) => {
            if a.json {
                settings.format = Format::Json;
            }
            let checks = verify::run_all(&settings.system);
            let text = match settings.format {
                Format::Csv => verify::render_text(&checks),
                Format::Json => output::json_value(&checks)?,
            };
            output::emit(&text, settings.output.as_deref())?;
            if verify::all_passed(&checks) {
                Ok(())
            } else {
                Err(CliError::ChecksFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::ChecksFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
