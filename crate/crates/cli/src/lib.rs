//! Library side of the `mted` command: argument definitions, file formats and the
//! implementation of every subcommand.

pub mod commands;
pub mod config;
pub mod document;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mted_core::geometry::GeometryError;
use mted_core::DistanceError;
use thiserror::Error;

pub use commands::run;

#[derive(Parser, Debug)]
#[command(name = "mted", version, about = "Edit distances, geodesics and means of merge trees")]
pub struct Cli {
    /// TOML file with solver limits and tolerances.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Merge tree of the sublevel sets of a sampled function given as CSV "x,y".
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Edit distance between two trees of the same kind.
    Dist {
        a: PathBuf,
        b: PathBuf,
        /// Also write an optimal mapping as JSON.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Pairwise distance matrix as CSV.
    Matrix {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Trees along a geodesic, as a JSON array of documents.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        /// Parameters in [0, 1].
        #[arg(long = "t", value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        t: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Approximate Fréchet mean by iterated tangent-space solves.
    Frechet {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Mean document (standard output if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Objective trace CSV (standard error if absent).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Classical MDS of a matrix CSV into the plane, as CSV "name,x,y".
    Mds {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Runs the peak-shift study and writes every artifact to a directory.
    Simulate {
        /// Number of small peaks.
        #[arg(long, default_value_t = 11)]
        peaks: usize,
        #[arg(short, long, default_value = "simulation")]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Assertion(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Assertion(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<DistanceError> for CliError {
    fn from(e: DistanceError) -> Self {
        match e {
            DistanceError::BudgetExhausted { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Distance(d) => d.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<document::DocumentError> for CliError {
    fn from(e: document::DocumentError) -> Self {
        CliError::Input(e.to_string())
    }
}
