use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "roy", version, about = "Partial identification bounds for Roy selection models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binary Roy model bounds, optionally with an instrument or sector covariates
    Binary(BinaryArgs),
    /// Generalized Roy model bounds with an excluded instrument
    Generalized(GeneralizedArgs),
    /// Distribution bounds for continuous outcomes
    Functional(FunctionalArgs),
    /// Interquantile-range bounds for the potential outcomes
    Iqr(IqrArgs),
    /// Confidence intervals from micro-data
    Infer(InferArgs),
    /// Draw a dataset from a design file or a built-in design
    Simulate(SimulateArgs),
    /// Brute-force cross-checks of the closed-form bounds
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// CSV file with a header row
    #[arg(long, value_name = "PATH", conflicts_with = "cells")]
    pub data: Option<PathBuf>,
    /// Cell probabilities as JSON, or @FILE
    #[arg(long, value_name = "JSON")]
    pub cells: Option<String>,
    #[arg(long, value_name = "COL", default_value = "y")]
    pub outcome: String,
    #[arg(long, value_name = "COL", default_value = "d")]
    pub sector: String,
    #[arg(long, value_name = "COL")]
    pub instrument: Option<String>,
    #[arg(long, value_name = "COL")]
    pub weight: Option<String>,
    /// Keep rows whose column equals the value exactly (repeatable)
    #[arg(long = "filter", value_name = "COL=VALUE")]
    pub filters: Vec<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 999)]
    pub bootstrap: usize,
    #[arg(long, value_name = "Q1,Q2", default_value = "0.25,0.75")]
    pub quantiles: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BinaryArgs {
    #[command(flatten)]
    pub common: Common,
    /// Tolerated variation of P(Y=1|z) across instrument values
    #[arg(long)]
    pub y_tolerance: Option<f64>,
    /// Sector-0 covariate column
    #[arg(long, value_name = "COL", requires = "x1")]
    pub x0: Option<String>,
    /// Sector-1 covariate column
    #[arg(long, value_name = "COL", requires = "x0")]
    pub x1: Option<String>,
    /// Covariate point to report, as X0,X1
    #[arg(long, value_name = "X0,X1", requires = "x0")]
    pub at: Option<String>,
}

#[derive(Debug, Args)]
pub struct GeneralizedArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FunctionalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Evaluation points; defaults to the pooled deciles
    #[arg(long, value_name = "Y,...", value_delimiter = ',')]
    pub at: Vec<f64>,
    /// Rectangle (y01,y02] x (y11,y12] for joint bounds
    #[arg(long, value_name = "Y01,Y02,Y11,Y12")]
    pub rect: Option<String>,
}

#[derive(Debug, Args)]
pub struct IqrArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sector; both when omitted
    #[arg(long = "d", value_name = "0|1")]
    pub sector_value: Option<u8>,
    /// Scale of the grid widening
    #[arg(long, default_value_t = 1.0)]
    pub lln: f64,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub lln: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Design JSON file or built-in design name
    #[arg(long)]
    pub design: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Truth record path; defaults to a sibling of --out
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Steps per axis of the simplex grid
    #[arg(long, default_value_t = 100)]
    pub grid: u32,
}
