mod args;
mod commands;

use std::io;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ConfigFile};
use commands::{usage, Failure, Outcome};

fn load_config(cli: &Cli) -> Result<ConfigFile, Failure> {
    let Some(path) = &cli.config else {
        return Ok(ConfigFile::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut config: ConfigFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    if let Some(dir) = path.parent() {
        config.rebase_paths(dir);
    }
    Ok(config)
}

fn run(cli: Cli) -> Outcome {
    let config = load_config(&cli)?;
    let periods = config.periods.unwrap_or_default();
    let stdout = io::stdout();
    let out = &mut stdout.lock();
    match cli.command {
        Command::Explore(a) => commands::explore(a.or(config.explore), out),
        Command::Render(a) => commands::render(a.or(config.render), periods, out),
        Command::Experiment(a) => commands::experiment(a.or(config.experiment), out),
        Command::Stats(a) => commands::stats(a.or(config.stats), out),
        Command::Serve(a) => commands::serve_cmd(a.or(config.serve), periods, out),
        Command::Raster(a) => commands::raster(a.or(config.raster), out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
