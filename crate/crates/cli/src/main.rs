use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rootclose_core::report::{self, Config, Format, PropsHooks, Report};

/// Verification harness for root closures, Fontaine rings and Witt vectors.
#[derive(Parser)]
#[command(name = "rootclose", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the worked example (checks E1 to E6).
    Example {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        witt_len: usize,
        /// Certificate search bound; defaults to depth + 2.
        #[arg(long)]
        mmax: Option<u32>,
        /// Negative control: run E5 over R instead of its root closure.
        #[arg(long)]
        plain_e5: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run the property suites.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Negative control: corrupt the Witt polynomial table.
        #[arg(long, hide = true)]
        tamper_witt: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Parse an expression and optionally certify closure membership.
    Eval {
        expr: String,
        #[arg(long)]
        check_closure: bool,
        #[arg(long, default_value_t = 5)]
        mmax: u32,
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Re-check every record of a JSON report from scratch.
    Revalidate {
        report: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

fn finish(mut report: Report, out: &Output) -> ExitCode {
    report.config.format = out.format.into();
    if !out.no_timestamp {
        report.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = std::io::stdout().write_all(report.render().as_bytes());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::Example {
            p,
            degree,
            depth,
            witt_len,
            mmax,
            plain_e5,
            out,
        } => {
            let cfg = Config {
                p,
                degree,
                depth,
                witt_len,
                m_max: mmax.unwrap_or(depth as u32 + 2),
                plain_e5,
                format: out.format.into(),
                ..Config::default()
            };
            let report = report::run_example_suite(&cfg).context("invalid configuration")?;
            finish(report, &out)
        }
        Command::Props {
            seed,
            tamper_witt,
            out,
        } => {
            let cfg = Config {
                seed,
                format: out.format.into(),
                ..Config::default()
            };
            let hooks = PropsHooks { tamper_witt };
            finish(report::run_property_suites_with(&cfg, &hooks), &out)
        }
        Command::Eval {
            expr,
            check_closure,
            mmax,
            p,
            degree,
            out,
        } => {
            let cfg = Config {
                p,
                degree,
                m_max: mmax,
                format: out.format.into(),
                ..Config::default()
            };
            let report = report::run_eval(&cfg, &expr, check_closure)?;
            finish(report, &out)
        }
        Command::Revalidate { report: path, out } => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let report = report::revalidate(&text).with_context(|| format!("revalidating {}", path.display()))?;
            finish(report, &out)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
