use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tensorspec", version, about = "Dense tensor algebra, decompositions and tensor spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order, shape, symmetry, Frobenius norm and multilinear rank.
    Info { input: PathBuf },
    /// Contract mode pairs `a:b`. With two files the default pair is the last
    /// mode of the first with the first mode of the second; with one file
    /// each pair is a trace.
    Contract {
        #[arg(required = true, num_args = 1..)]
        args: Vec<String>,
    },
    /// Z- or H-eigenpairs in one mode (`--variant`, `--mode`).
    Eig { input: PathBuf },
    /// l2 or lO singular value tuples (`--p 2` or `--p O`).
    Svd { input: PathBuf },
    /// CP decomposition by alternating least squares (`--rank`).
    Cp { input: PathBuf },
    /// Truncated HOSVD to the given multilinear ranks (`--ranks a,b,c`).
    Tucker { input: PathBuf },
    /// HOSVD at the multilinear rank, an exact Tucker compression.
    Hosvd { input: PathBuf },
    /// Odeco recovery by power iteration and deflation.
    Odeco { input: PathBuf },
    /// Multilinear rank.
    Mlrank { input: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Info { .. } => "info",
            Command::Contract { .. } => "contract",
            Command::Eig { .. } => "eig",
            Command::Svd { .. } => "svd",
            Command::Cp { .. } => "cp",
            Command::Tucker { .. } => "tucker",
            Command::Hosvd { .. } => "hosvd",
            Command::Odeco { .. } => "odeco",
            Command::Mlrank { .. } => "mlrank",
        }
    }

    /// Long flags (besides the output flags) the subcommand reads.
    pub fn accepted(&self) -> &'static [&'static str] {
        const SOLVER: [&str; 5] = ["tol", "max-iters", "seed", "starts", "threads"];
        match self {
            Command::Info { .. } | Command::Mlrank { .. } | Command::Hosvd { .. } => &["tol"],
            Command::Contract { .. } => &[],
            Command::Eig { .. } => &["variant", "mode", "tol", "max-iters", "seed", "starts", "threads"],
            Command::Svd { .. } => &["p", "tol", "max-iters", "seed", "starts", "threads"],
            Command::Cp { .. } => &["rank", "tol", "max-iters", "seed", "starts", "threads"],
            Command::Tucker { .. } => &["ranks"],
            Command::Odeco { .. } => &SOLVER[..4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Z,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct Opts {
    #[arg(long, global = true, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, global = true)]
    pub mode: Option<usize>,
    /// 2, or the tensor order (also accepted as `O`).
    #[arg(long, global = true)]
    pub p: Option<String>,
    #[arg(long, global = true)]
    pub rank: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iters", global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    #[arg(
        long,
        global = true,
        env = "TENSORSPEC_THREADS",
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    pub threads: Option<u64>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: Format,
}

impl Opts {
    /// Names of the solver flags that were given explicitly. The thread
    /// count may come from the environment, which is never an error.
    pub fn given(&self) -> Vec<&'static str> {
        let mut g = Vec::new();
        let mut push = |set: bool, name| {
            if set {
                g.push(name)
            }
        };
        push(self.variant.is_some(), "variant");
        push(self.mode.is_some(), "mode");
        push(self.p.is_some(), "p");
        push(self.rank.is_some(), "rank");
        push(self.ranks.is_some(), "ranks");
        push(self.tol.is_some(), "tol");
        push(self.max_iters.is_some(), "max-iters");
        push(self.seed.is_some(), "seed");
        push(self.starts.is_some(), "starts");
        g
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1) as usize
    }
}
