use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "iet", version, about = "Rauzy-Veech renormalization of interval exchange transformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Omit the `meta` header (tool version and timestamp) from the output.
    #[arg(long, global = true)]
    pub no_meta: bool,
    /// Seed for every random choice (sample points, test vectors).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of instances processed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Combinatorics, Lyapunov spectrum and Diophantine report of each instance.
    Analyze(RunArgs),
    /// Elementary Rauzy-Veech steps.
    Rv(RunArgs),
    /// Lyapunov spectrum of the cocycle.
    Lyapunov(RunArgs),
    /// Empirical test of the Diophantine conditions; exit code 2 if not admissible.
    DcTest(RunArgs),
    /// Solve the cohomological equation u o T - u = phi - chi.
    Solve(SolveArgs),
    /// Codimension of the local conjugacy class.
    Codim(CodimArgs),
    /// Enumerate primitive Rauzy loops based at a permutation.
    Loops(LoopsArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Interval exchange: a JSON file or inline JSON. May be repeated.
    #[arg(long = "iet")]
    pub iets: Vec<String>,
    /// Rauzy loop: a JSON file, inline JSON or `ew`. May be repeated.
    #[arg(long = "loop")]
    pub loops: Vec<String>,
    /// Number of elementary steps (loops: rounded up to whole periods).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Working precision in bits; by default derived from the depth and `--rate`.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Assumed decay of the lengths, in nats per step, for the default precision.
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Growth threshold of the spectral-gap condition.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon_c: f64,
    /// Floor of the stable-space contraction condition.
    #[arg(long, default_value_t = 0.5)]
    pub floor_d: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Right-hand side: a piecewise-function JSON file, inline JSON, or
    /// `cos[:k[:phase]]` for cos(2 pi k x + phase).
    #[arg(long, default_value = "cos")]
    pub phi: String,
    /// Regularity order: solve for u and its first r-1 derivatives.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    /// Grid intervals per piece of the returned solution.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    /// Truncation level of the correction series; derived from the path by default.
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CodimArgs {
    #[arg(long)]
    pub g: Option<u64>,
    #[arg(long)]
    pub s: Option<u64>,
    /// Number of negative exponents on the kernel of the boundary operator.
    #[arg(long)]
    pub mu: u64,
    /// Regularity; a comma-separated list gives one row each.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<u64>,
    /// Take g and s from a permutation pair such as "A B C D / D C B A".
    #[arg(long)]
    pub pi: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct LoopsArgs {
    /// Base permutation pair, e.g. "A B C D / D C B A". May be repeated.
    #[arg(long = "pi", required = true)]
    pub pis: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub max_len: usize,
    /// Precision of the Perron-Frobenius data in bits.
    #[arg(long, default_value_t = 256)]
    pub precision: usize,
}
