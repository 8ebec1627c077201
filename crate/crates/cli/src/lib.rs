//! Command-line front end for the `hopf_nfde` toolkit.

pub mod commands;
pub mod config;
pub mod format;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use commands::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "hopf-nfde",
    version,
    about = "Hopf-Hopf analysis of the delayed van der Pol oscillator"
)]
pub struct Cli {
    /// Output file (directory for `simulate`); standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular output.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
    /// Flat `key = value` file with defaults for any numeric option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PointArgs {
    #[arg(long)]
    pub j_plus: Option<u32>,
    #[arg(long)]
    pub j_minus: Option<u32>,
    /// Search interval for k0 as `lo:hi`.
    #[arg(long)]
    pub bracket: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Steps per delay; the step is `tau / h_div`.
    #[arg(long)]
    pub h_div: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub transient: Option<f64>,
    /// `theta` or `neutral`.
    #[arg(long)]
    pub formulation: Option<String>,
    /// Delayed values at the midpoint stages: `hermite` or `stage-reuse`.
    #[arg(long)]
    pub delay_scheme: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Hopf curves tau_j(k) of both branches.
    HopfCurves {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid of k as `lo:hi:step`.
        #[arg(long)]
        k_range: Option<String>,
        #[arg(long)]
        j_max: Option<u32>,
    },
    /// Locate a Hopf-Hopf point and report its normal form and unfolding.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Integrate at (k0 + alpha1, tau0 + alpha2) and label the attractor.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        alpha1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha2: Option<f64>,
        /// Report written by `analyze`; recomputed when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Keep every n-th trajectory sample in the CSV.
        #[arg(long)]
        stride: Option<usize>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Label points alpha = iota (0.1, 0.081) on the line T.
    LineT {
        /// Comma-separated values of iota.
        #[arg(long)]
        iota: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Exit status for a failed run.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<hopf_nfde::Error>() {
        return match e {
            hopf_nfde::Error::InvalidParams(_) | hopf_nfde::Error::HypothesisViolated { .. } => 3,
            hopf_nfde::Error::NonFiniteState { .. } => 5,
            _ => 4,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 6;
    }
    3
}

/// Machine-readable description of a failed run.
pub fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let message = format!("{err:#}");
    match err.downcast_ref::<hopf_nfde::Error>() {
        Some(e) => {
            let mut body = json!({ "kind": e.kind(), "message": message });
            if let hopf_nfde::Error::NonFiniteState { t } = e {
                body["t"] = json!(t);
            }
            json!({ "error": body })
        }
        None => {
            let kind = if err.downcast_ref::<std::io::Error>().is_some() {
                "Io"
            } else {
                "Input"
            };
            json!({ "error": { "kind": kind, "message": message } })
        }
    }
}
