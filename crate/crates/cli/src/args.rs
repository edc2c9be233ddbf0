use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncwig::measures::CatalogId;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "ncwig", version, about = "Phase-space quasi-distributions on a noncommutative phase space")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Echoed verbatim into each report.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Reduced Planck constant [default: 1, or the input file's value]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub hbar: Option<f64>,
    /// Position noncommutativity θ [default: 0.5, or the input file's value]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Momentum noncommutativity η [default: 0.5, or the input file's value]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Seed for randomized searches
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Trials per KLM witness search
    #[arg(long, global = true, default_value_t = 500)]
    pub trials: usize,
    /// Largest KLM point set
    #[arg(long = "m-max", global = true, default_value_t = 6)]
    pub m_max: usize,
    /// Grid points per axis [default: 64 in 4D, 256 in 2D]
    #[arg(long, global = true)]
    pub npts: Option<usize>,
    /// Relative tolerance for grid verdicts
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Output format [default: table for figure1, json otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn overrides_params(&self) -> bool {
        self.hbar.is_some() || self.theta.is_some() || self.eta.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    /// ħΩ
    Full,
    /// ħJ
    Moyal,
    /// θE on the positions
    Theta,
    /// ηE on the momenta
    Eta,
    /// θE ⊕ ηE
    ThetaEta,
}

/// Input files: a report from `catalog`, a labeled measure, or a bare function
/// descriptor. `-` reads standard input.
#[derive(Subcommand, Debug)]
pub enum Command {
    /// Standard Darboux map S with S J Sᵀ = Ω
    Darboux {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Pfaffian of Ω, or of an antisymmetric matrix given row-major
    Pfaffian {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        matrix: Option<Vec<f64>>,
    },
    /// Catalog function f1…f7 or g as a JSON descriptor
    Catalog {
        /// f1 … f7 or g
        #[arg(value_parser = parse_catalog_id)]
        id: CatalogId,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        d: Option<f64>,
        /// Also sample on the enclosing grid and write CSV here
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Purity and marginal purities against their bounds
    Purity {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
        /// Cross-check the purity on the enclosing grid
        #[arg(long)]
        grid: bool,
    },
    /// Position and momentum marginals
    Marginals {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
    },
    /// Closed-form Wigner / noncommutative Wigner tests for a Gaussian
    GaussianTest {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
    },
    /// Robertson–Schrödinger matrices Σ + (iħ/2)Ω and Σ + (iħ/2)J
    Uncertainty {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
    },
    /// KLM witness search
    Klm {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Commutative conditions at α (default ħ)
        #[arg(long, conflicts_with_all = ["beta", "gamma"])]
        commutative: bool,
    },
    /// Grid star product of two functions
    Star {
        /// Left factor: a JSON descriptor or measure, or - for stdin
        a: PathBuf,
        /// Right factor: a JSON descriptor or measure, or - for stdin
        b: PathBuf,
        /// Noncommutativity matrix of the product
        #[arg(long, value_enum, default_value_t = KernelArg::Full)]
        kernel: KernelArg,
        /// Output file for the product grid
        #[arg(long)]
        out: PathBuf,
        /// Write the binary grid format instead of CSV
        #[arg(long)]
        binary: bool,
        /// Box half-width in envelope standard deviations [default: up to 6,
        /// as far as the grid size allows]
        #[arg(long)]
        sigmas: Option<f64>,
    },
    /// Full evidence report and region
    Classify {
        /// Measure JSON file, or - for stdin
        input: PathBuf,
        /// Skip KLM searches
        #[arg(long)]
        no_klm: bool,
    },
    /// Classify f1…f7 and print the region table
    Figure1,
}

fn parse_catalog_id(s: &str) -> Result<CatalogId, String> {
    s.parse().map_err(|_| format!("expected one of f1, f2, f3, f4, f5, f6, f7, g; got {s:?}"))
}
