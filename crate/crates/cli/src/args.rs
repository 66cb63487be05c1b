use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Clone)]
#[command(name = "kropina", version, about = "Curvature and classification of generalized m-Kropina metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Evaluate one object at given or sampled points.
    Compute {
        /// Object name, see `--object help`.
        #[arg(long)]
        object: String,
        /// Point as "x=..;y=..", repeatable.
        #[arg(long)]
        at: Vec<String>,
        /// Transverse direction for the flag curvature, comma separated.
        #[arg(long)]
        u: Option<String>,
        /// Volume density for the S-curvature (defaults to √|det a|).
        #[arg(long)]
        density: Option<String>,
    },
    /// Exact fiber-rationality certificates for the tabulated objects.
    RationalityTable {
        /// Base point, comma separated; defaults to the builtin's point.
        #[arg(long)]
        at_x: Option<String>,
    },
    /// Defect functionals for the special metric classes.
    Classify {
        /// Property name or "all", repeatable.
        #[arg(long, required = true)]
        property: Vec<String>,
        /// Number of sampled base points.
        #[arg(long, default_value_t = 4)]
        bases: usize,
    },
    /// Vacuum and Chen–Shen residuals (dimension 4).
    FieldResidual {
        #[arg(long)]
        at: Vec<String>,
        /// Indicatrix average of Ric; estimated by Monte Carlo when absent
        /// and `--r-avg-samples` is given, otherwise 0.
        #[arg(long)]
        r_avg: Option<f64>,
        #[arg(long)]
        r_avg_samples: Option<usize>,
    },
    /// Check the stated claims of a builtin metric.
    VerifyExample { id: String },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    Exact,
    Numeric,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Metric configuration file (JSON).
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub config: Option<PathBuf>,
    /// Builtin metric id.
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Override the family exponent.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<i64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled points (per base point for `classify`).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Absolute tolerance (default 1e-12).
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// Relative tolerance (default 1e-9; 1e-8 for `classify` defects).
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}
