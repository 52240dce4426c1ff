use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ddesim::commands::{execute, Command};
use ddesim::output::emit;
use ddesim::{Result, RunConfig};
use ddesim_core::Verdict;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Spectrum,
    Converge,
    Chart,
    Floquet,
    Solve,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Converge => Command::Converge,
            Cmd::Chart => Command::Chart,
            Cmd::Floquet => Command::Floquet,
            Cmd::Solve => Command::Solve,
        }
    }
}

/// Spectra, convergence studies and stability charts for linear delay equations.
#[derive(Debug, Parser)]
#[command(name = "ddesim", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Collocation degree; also resets M unless --M is given.
    #[arg(long = "N")]
    n: Option<usize>,
    /// History grid degree.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Output file, `-` for standard output. Defaults to `<command>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when the verdict is unstable.
    #[arg(long)]
    fail_on_unstable: bool,
}

fn run(cli: &Cli) -> Result<u8> {
    let cmd = Command::from(cli.command);
    let cfg = RunConfig::load(&cli.config)?.with_overrides(cli.n, cli.m);
    let out = execute(cmd, &cfg)?;
    let path = cli.out.clone().unwrap_or_else(|| PathBuf::from(cmd.default_output()));
    emit(&path, &out.csv)?;
    for w in &out.warnings {
        eprintln!("{w}");
    }
    for m in &out.messages {
        // keep stdout pure CSV when it carries the table
        if path.as_os_str() == "-" {
            eprintln!("{m}");
        } else {
            println!("{m}");
        }
    }
    Ok(if cli.fail_on_unstable && out.verdict == Some(Verdict::Unstable) {
        2
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
