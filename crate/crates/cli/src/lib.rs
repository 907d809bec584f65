//! The `roy` command line: CSV or cell input, one subcommand per bound
//! family, JSON or CSV reports.
//!
//! Exit codes: 0 success, 1 input error, 2 model rejection (crossed bounds,
//! empty identified set or empty confidence interval).

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use roybounds::RoyError;

mod args;
mod commands;
pub mod designs;
mod input;
mod report;

pub use args::{Cli, Command, Format};
pub use report::Report;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Model(String),
}

impl From<RoyError> for CliError {
    fn from(e: RoyError) -> Self {
        if e.is_model_rejection() {
            CliError::Model(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub(crate) enum Emit {
    /// Report to `--out`, or stdout.
    Report,
    /// Report to stdout; `--out` already holds other output.
    ReportToStdout,
    Text(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let (name, common) = match &cli.command {
        Command::Binary(a) => ("binary", &a.common),
        Command::Generalized(a) => ("generalized", &a.common),
        Command::Functional(a) => ("functional", &a.common),
        Command::Iqr(a) => ("iqr", &a.common),
        Command::Infer(a) => ("infer", &a.common),
        Command::Simulate(a) => ("simulate", &a.common),
        Command::Oracle(a) => ("oracle", &a.common),
    };
    let mut report = Report::new(echo, name);
    report.seed = Some(common.seed.unwrap_or(0));
    let outcome = match &cli.command {
        Command::Binary(a) => commands::binary(a, &mut report),
        Command::Generalized(a) => commands::generalized(a, &mut report),
        Command::Functional(a) => commands::functional(a, &mut report),
        Command::Iqr(a) => commands::iqr(a, &mut report),
        Command::Infer(a) => commands::infer(a, &mut report),
        Command::Simulate(a) => commands::simulate_cmd(a, &mut report),
        Command::Oracle(a) => commands::oracle(a, &mut report),
    };
    let emit = match outcome {
        Ok(e) => e,
        Err(CliError::Model(msg)) => {
            report.reject(msg);
            Emit::Report
        }
        Err(CliError::Input(msg)) => {
            let _ = writeln!(stderr, "roy {name}: {msg}");
            return EXIT_INPUT;
        }
    };
    let (text, to_file) = match emit {
        Emit::Text(t) => (t, common.out.is_some()),
        Emit::Report => (report.render(common.format), common.out.is_some()),
        Emit::ReportToStdout => (report.render(common.format), false),
    };
    if to_file {
        let path = common.out.as_ref().expect("checked above");
        if let Err(CliError::Input(msg)) = commands::write_file(path, &text) {
            let _ = writeln!(stderr, "roy {name}: {msg}");
            return EXIT_INPUT;
        }
    } else if stdout.write_all(text.as_bytes()).is_err() {
        return EXIT_INPUT;
    }
    for d in &report.diagnostics {
        let _ = writeln!(stderr, "roy {name}: {d}");
    }
    match report.status.as_str() {
        "ok" => EXIT_OK,
        "rejected" => EXIT_REJECTED,
        _ => EXIT_INPUT,
    }
}
