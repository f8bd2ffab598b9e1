use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "decay", version, about = "Entrywise decay bounds for functions of banded and Kronecker-structured Hermitian matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound one column of f(M) and compare it with an oracle; CSV output.
    Bound(BoundArgs),
    /// Like `bound`, but the summary goes to stdout and violations exit with 3.
    Compare(BoundArgs),
    /// Bound one column of f(A) for a Kronecker sum A of banded factors.
    Kron(KronArgs),
    /// Column of f(M + iζI) from the dense eigendecomposition.
    Oracle(OracleArgs),
    /// Regenerate the data behind one of the reference figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundClass {
    Laplace,
    Cauchy,
    Exp,
    Resolvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KronClass {
    Laplace,
    Cauchy,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceMode {
    /// `|k - t| / β` from the bandwidth.
    Band,
    /// Shortest-path distance in the sparsity pattern.
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    /// Series oracle when it applies, dense eigendecomposition otherwise.
    Auto,
    Eigen,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexOrderArg {
    LastFastest,
    FirstFastest,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Relative tolerance of the bound integrals.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
    /// Panel budget of the adaptive quadrature.
    #[arg(long)]
    pub quad_max_panels: Option<usize>,
    /// Also evaluate integral bounds at distances below their stated range.
    #[arg(long)]
    pub extended: bool,
    #[arg(long, value_enum, default_value_t = OracleMode::Auto)]
    pub oracle: OracleMode,
    /// Exit with 3 if any bound falls below its oracle value.
    #[arg(long)]
    pub self_check: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// tridiag, pentadiag, tridiag:a,b,c, pentadiag:a,b,c,d,e, identity, or a .mtx file.
    #[arg(long, default_value = "tridiag")]
    pub matrix: String,
    /// Order of generated matrices; ignored for .mtx files.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Catalog function, e.g. inv_sqrt, phi1, inv_pow:1.5, expsqrt:1, inv_sqrt_closed.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, value_enum, default_value_t = BoundClass::Laplace)]
    pub class: BoundClass,
    /// Time parameter of the exponential class.
    #[arg(long, default_value_t = 4.0)]
    pub tau: f64,
    /// Imaginary shift: bound f(M + iζI).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub zeta: f64,
    /// 1-based column index.
    #[arg(long, default_value_t = 127)]
    pub column: usize,
    #[arg(long, value_enum, default_value_t = DistanceMode::Band)]
    pub distance: DistanceMode,
    /// Entries with modulus at or below this are not edges of the pattern graph.
    #[arg(long, default_value_t = 0.0)]
    pub pattern_drop_tol: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KronArgs {
    /// Comma-separated factor list, e.g. `tridiag,pentadiag` or `tridiag:-1,4,-1,tridiag`.
    #[arg(long, default_value = "tridiag,tridiag")]
    pub factors: String,
    /// Order of every generated factor.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// 1-based linear index `t`, or 1-based grid coordinates `t1,t2[,t3]`.
    #[arg(long, default_value = "94")]
    pub column: String,
    #[arg(long, value_enum, default_value_t = IndexOrderArg::LastFastest)]
    pub index_order: IndexOrderArg,
    #[arg(long, value_enum, default_value_t = KronClass::Laplace)]
    pub class: KronClass,
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    pub tau: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value = "tridiag")]
    pub matrix: String,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value = "inv_sqrt")]
    pub function: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub zeta: f64,
    #[arg(long, default_value_t = 127)]
    pub column: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// exp(-4M), covered rows only.
    Fig1Exp,
    /// Laplace–Stieltjes bound for M^{-1/2}.
    Fig2LsInvsqrt,
    /// Laplace–Stieltjes bound for (I - e^{-M}) M^{-1}.
    Fig3LsPhi1,
    /// Closed-form Cauchy–Stieltjes bound for M^{-1/2}.
    Fig4CsInvsqrt,
    /// Full dump of exp(-5A), A = M ⊕ M with n = 20.
    Fig5Exp,
    /// Full dump of A^{-1/2}, A = M ⊕ M with n = 20.
    Fig5Invsqrt,
    /// Kronecker bound for phi1, column 94 of A = M ⊕ M.
    Fig6KronPhi1,
    /// Kronecker bound for A^{-1/2}, column 94 of A = M ⊕ M.
    Fig7KronInvsqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureMatrix {
    Tridiag,
    Pentadiag,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    #[arg(long, value_enum, default_value_t = FigureMatrix::Tridiag)]
    pub matrix: FigureMatrix,
    #[arg(long)]
    pub self_check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
