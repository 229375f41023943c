use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gcdsum", version, about = "Generalized gcd-sum functions: evaluation, identity checks, summatory scans")]
pub struct Cli {
    /// Output format for the primary result.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write the primary result to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a single value exactly.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run an identity suite up to the given bounds.
    Verify(VerifyArgs),
    /// Summatory scans and the extremal statistic.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Evaluate the Igusa zeta function of Z/nZ at real s.
    Igusa(IgusaArgs),
    /// Export f_r(p^k) coefficient tables as (r, k, i, c_i).
    FrTable(FrTableArgs),
}

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// A_r(n).
    #[command(name = "A")]
    A {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u32,
        #[arg(long, value_enum, default_value_t = AMethod::Local)]
        method: AMethod,
    },
    /// B_r(n).
    #[command(name = "B")]
    B {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u32,
        #[arg(long, value_enum, default_value_t = BMethod::Closed)]
        method: BMethod,
    },
    /// Sum of gcd(a k - 1, n) over units k.
    Menon {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
    },
    /// Piltz divisor function tau_k(n).
    Tau {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u64,
    },
    /// f_r(p^k) as a polynomial in u = 1/p.
    Fr {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AMethod {
    Local,
    Recursion,
    Brute,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BMethod {
    Closed,
    Brute,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Brute force, product formula and recursion agree.
    AThreeway,
    /// Menon sums equal phi(n) tau(n) for every unit a.
    Menon,
    /// B_r(n) by enumeration equals phi(n)^r tau(n).
    BClosed,
    /// Coprime counts in progressions equal phi(n)/phi(d).
    Progression,
    /// f_r(p^k) vanishes for k > r and has no constant term.
    FrVanishing,
    /// tau_{r+1} * f_r equals A_r.
    FrConvolution,
    /// f_r * g_r is the identity at prime powers.
    Inverse,
    /// A_r(n) <= tau_{r+1}(n).
    Domination,
    /// A_r(n) increases in r towards n.
    Limit,
    /// Standard functions are multiplicative on random coprime pairs.
    Multiplicative,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub nmax: Option<u64>,
    #[arg(long)]
    pub rmax: Option<u32>,
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Number of random samples for randomized suites.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ScanOutputArgs {
    #[arg(long, default_value_t = 40)]
    pub checkpoints: usize,
    /// Write checkpoint rows (x, sum, main_term, residual) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the full report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Include wall-clock time in reports (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum ScanCommand {
    /// Partial sums of A_r.
    #[command(name = "A")]
    A {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        xmax: u64,
        #[command(flatten)]
        out: ScanOutputArgs,
    },
    /// Partial sums of tau_k.
    Tau {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        xmax: u64,
        #[command(flatten)]
        out: ScanOutputArgs,
    },
    /// log A_r(n_x) log log n_x / log n_x for n_x the product of primes in (x/log x, x].
    Extremal {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        x: u64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum IgusaMethodArg {
    Hurwitz,
    Direct,
}

#[derive(Args, Debug)]
pub struct IgusaArgs {
    #[arg(long)]
    pub n: u64,
    /// Comma-separated real exponents, each > 1.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<f64>,
    #[arg(long, value_enum, default_value_t = IgusaMethodArg::Hurwitz)]
    pub method: IgusaMethodArg,
    /// Truncation for the direct method.
    #[arg(long, default_value_t = 100_000)]
    pub trunc: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct FrTableArgs {
    #[arg(long)]
    pub rmax: u32,
    #[arg(long)]
    pub kmax: u32,
}
