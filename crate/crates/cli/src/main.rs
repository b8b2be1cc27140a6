//! `indefinite-sl`: non-real eigenvalues of `sgn(x)(-f'' + q f)`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use indefinite_sl::config::{Format, RunConfig};
use indefinite_sl::pipeline::{cmd_bounds, cmd_kernel, cmd_scan, cmd_solve, ExitStatus};
use indefinite_sl::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Non-real eigenvalues of sgn(x)(-f'' + q f) by two independent methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override one config key by dotted path, e.g. `grid.density_factor=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Locate eigenvalues, cross-check the methods and verify the bounds.
    Solve(Common),
    /// Tabulate both characteristic functions on a λ-grid.
    Scan(Common),
    /// Print norms, bounds and the search region.
    Bounds(Common),
    /// Tabulate the free resolvent kernel.
    Kernel(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

fn run(cli: Cli) -> Result<ExitStatus, Error> {
    let (common, default_format) = match &cli.command {
        Command::Solve(c) | Command::Bounds(c) => (c, Format::Json),
        Command::Scan(c) | Command::Kernel(c) => (c, Format::Csv),
    };
    let config = RunConfig::load(&common.config, &common.set)?;
    let format = common
        .format
        .map(Format::from)
        .or(config.output.format)
        .unwrap_or(default_format);
    let (text, status) = match &cli.command {
        Command::Solve(_) => {
            let report = cmd_solve(&config)?;
            (report.render(format)?, report.exit_status())
        }
        Command::Scan(_) => (cmd_scan(&config)?.render(format)?, ExitStatus::Success),
        Command::Bounds(_) => {
            let summary = cmd_bounds(&config)?;
            if let Some(note) = &summary.note {
                eprintln!("{note}");
            }
            (summary.render(format)?, ExitStatus::Success)
        }
        Command::Kernel(_) => (cmd_kernel(&config)?.render(format)?, ExitStatus::Success),
    };
    match common.out.as_ref().or(config.output.path.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let status = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitStatus::from_error(&e)
    });
    if status != ExitStatus::Success {
        eprintln!("exit status: {status:?}");
    }
    ExitCode::from(status.code() as u8)
}
