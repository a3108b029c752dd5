use std::fs::File;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use illiq_cli::{run, Cli, CliError, RunReport};

fn write_outputs(cli: &Cli, report: &RunReport) -> Result<(), CliError> {
    let io = |path: &std::path::Path, e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let json = report.to_json();
    match &cli.out {
        Some(path) => std::fs::write(path, json).map_err(|e| io(path, e))?,
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}")))?,
    }
    if let Some(path) = &cli.csv {
        let file = File::create(path).map_err(|e| io(path, e))?;
        report.write_csv(file)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| write_outputs(&cli, &report));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("illiq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
