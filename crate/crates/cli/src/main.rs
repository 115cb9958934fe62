mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sumset_core::Mode;

#[derive(Parser, Debug)]
#[command(name = "sumset", version, about = "Differences of self-similar Cantor sets: covers, densities, orbits and certified perturbations")]
struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// The two IFS files; the second defaults to the first.
#[derive(Args, Debug)]
pub struct Pair {
    /// IFS definition (JSON with `labels` and `maps`).
    pub ifs_k: PathBuf,
    /// Second IFS; defaults to the first.
    pub ifs_k_prime: Option<PathBuf>,
}

/// Overrides for the pipeline config keys.
#[derive(Args, Debug, Default)]
pub struct Overrides {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "M")]
    pub m_bound: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub n_override: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "cross-sum" => Ok(Mode::CrossSum),
        "self-sum" => Ok(Mode::SelfSum),
        _ => Err(format!("unknown mode `{s}` (expected cross-sum or self-sum)")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Similarity dimension of an IFS.
    Dim { ifs: PathBuf },
    /// Union of projected depth-n rectangles, as CSV `lo,hi`.
    Cover {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Merge components separated by at most this much.
        #[arg(long, default_value_t = 1e-12)]
        merge_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of the projected product measure, as CSV.
    Density {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Number of bins across the support.
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Good and bad cylinder pairs at scale rho.
    GoodPairs {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long = "M", default_value_t = 4.0)]
        m_bound: f64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value = "cross-sum", value_parser = parse_mode)]
        mode: Mode,
        /// Accept pair families of at most |A x A'|/24 pairs.
        #[arg(long)]
        lenient: bool,
        /// Write the full per-pair report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a renormalization orbit that stays in the box.
    Orbit {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long = "M", default_value_t = 4.0)]
        m_bound: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        word_len: usize,
    },
    /// Admissible sets L(r) for a pipeline config.
    BuildL {
        config: PathBuf,
        /// Scales at which to build L(r); repeatable.
        #[arg(long = "r", required = true)]
        rs: Vec<f64>,
        /// Also write the E grid as CSV `r,l2_norm,in_E`.
        #[arg(long)]
        e_out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the whole construction and write report, certificates and manifest.
    Certify {
        /// Pipeline config (required unless --verify-only is given).
        config: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        out_dir: PathBuf,
        /// Re-check an existing certificate bundle instead of running.
        #[arg(long, conflicts_with = "config")]
        verify_only: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let threads = rayon::current_num_threads();
    let result = match cli.command {
        Command::Dim { ifs } => commands::dim(&ifs),
        Command::Cover {
            pair,
            r,
            depth,
            merge_tol,
            out,
        } => commands::cover(&pair, r, depth, merge_tol, out.as_deref()),
        Command::Density {
            pair,
            r,
            depth,
            bins,
            out,
        } => commands::density(&pair, r, depth, bins, out.as_deref()),
        Command::GoodPairs {
            pair,
            r,
            rho,
            m_bound,
            epsilon,
            mode,
            lenient,
            out,
        } => commands::good_pairs(&pair, r, rho, m_bound, epsilon, mode, lenient, out.as_deref()),
        Command::Orbit {
            pair,
            r,
            t,
            m_bound,
            steps,
            word_len,
        } => commands::orbit(&pair, r, t, m_bound, steps, word_len),
        Command::BuildL {
            config,
            rs,
            e_out,
            overrides,
        } => commands::build_l(&config, &rs, e_out.as_deref(), &overrides, cli.seed),
        Command::Certify {
            config,
            out_dir,
            verify_only,
            overrides,
        } => match (verify_only, config) {
            (Some(file), _) => commands::verify_only(&file),
            (None, Some(config)) => commands::certify(&config, &out_dir, &overrides, cli.seed, threads),
            (None, None) => Err(commands::Failure::usage("certify needs a config file or --verify-only")),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
