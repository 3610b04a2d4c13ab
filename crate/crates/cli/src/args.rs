use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tblim", version, about = "Discrete time and band limiting on Z/2nZ")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write Q, T, A, A*, pi_1 and pi_2 as matrices.
    Build(Common),
    /// Joint eigenvalues (t, q) of T and Q on the time window.
    Spectrum(Common),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Solve the Bethe equations and match every eigenvalue.
    Bethe(BetheArgs),
    /// Recover a time-limited signal from its low Fourier coefficients.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Half the period: signals live on Z/2nZ.
    #[arg(long)]
    pub n: usize,
    /// Band limit.
    #[arg(long = "K")]
    pub k: usize,
    /// Time limit.
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, value_enum)]
    pub parity: Option<ParityArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override: match tolerance for `bethe`, relative zero
    /// threshold for `reconstruct`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Parameter ranges to sweep, e.g. `K=1..n` or `K=0..4,L=1..n`.
    /// Ranges are inclusive and `n` stands for the value of `--n`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Check the matrices in a file written by `build` instead of freshly
    /// built ones.
    #[arg(long)]
    pub operators: Option<PathBuf>,
    /// Generic sample points per sampled identity.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone)]
pub struct BetheArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to `first` for the minus sector and `plus` for the plus sector.
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzArg>,
    /// Random Newton starts after the linearized seeds (default 64 * dim).
    #[arg(long)]
    pub max_starts: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with columns index,re,im and one row per point of Z/2nZ.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityArg {
    Plus,
    Minus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzArg {
    First,
    Second,
    Plus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}
