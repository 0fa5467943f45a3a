use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use schurlsd::config::{parse_override, RunConfig};
use schurlsd::{execute, CliError, Command, RayonExecutor};

#[derive(Parser)]
#[command(name = "schurlsd", version, about = "Spectra of Schur-Hadamard products of patterned random matrices")]
struct Cli {
    /// JSON config file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "schurlsd-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Config override, repeatable; the value is parsed as JSON when possible.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p, &overrides, cli.seed)?,
        None => RunConfig::builtin(&overrides, cli.seed)?,
    };
    let exec = RayonExecutor::new(cli.threads).map_err(|e| CliError::Config {
        key: "--threads".into(),
        value: cli.threads.to_string(),
        reason: e.to_string(),
    })?;
    let (manifest, checks) = execute(cli.command, &cfg, &cli.out, &exec)?;
    for c in checks.iter().filter(|c| !c.pass) {
        println!("FAIL {}", c.name);
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    println!("{}: {passed}/{} checks passed", manifest.command, checks.len());
    for f in &manifest.files {
        println!("wrote {}", cli.out.join(&f.path).display());
    }
    Ok(manifest.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
