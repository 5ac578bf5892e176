mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use ocn_core::tau::dims::dims;
use ocn_core::verify::certificate::{certify, resweep, Certificate};
use ocn_core::verify::search::thread_pool;
use ocn_core::verify::thresholds::Thresholds;
use ocn_core::OcnError;

use config::RunConfig;

const EXIT_USAGE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "ocn", version, about = "Search, certify and inspect special tau_N-configurations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the dimension counts for one n
    Dims {
        #[arg(long)]
        n: usize,
    },
    /// Search for a configuration and write its certificate
    Certify {
        /// JSON run configuration; flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
        /// Matrix width: configurations live in R^{2xn} x R^{2xn}, n >= 2
        #[arg(long)]
        n: Option<usize>,
        /// Seed of the candidate stream
        #[arg(long)]
        seed: Option<u64>,
        /// Number of candidates to try
        #[arg(long)]
        budget: Option<u64>,
        /// Certificate path, default certificate-n<N>-seed<SEED>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of xi, pi and recursion edges on two coordinates
    Plot {
        #[arg(long)]
        certificate: PathBuf,
        /// First piece (1-based)
        #[arg(long, default_value_t = 1)]
        from: usize,
        /// Last piece, default N
        #[arg(long)]
        to: Option<usize>,
        /// Horizontal coordinate of R^{4n} (0-based)
        #[arg(long, default_value_t = 0)]
        u: usize,
        /// Vertical coordinate of R^{4n} (0-based)
        #[arg(long, default_value_t = 1)]
        v: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the lambda sweep of a certificate on another grid
    Sweep {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Exhausted,
    Internal(String),
}

impl From<OcnError> for Failure {
    fn from(e: OcnError) -> Self {
        match e {
            OcnError::Config(m) => Failure::Usage(m),
            OcnError::InvalidDimension(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn tol_flag(name: &str) -> String {
    format!("tol-{}", name.replace('_', "-"))
}

fn command() -> clap::Command {
    Cli::command().mut_subcommand("certify", |c| {
        Thresholds::names().into_iter().fold(c, |c, name| {
            c.arg(
                Arg::new(name.clone())
                    .long(tol_flag(&name))
                    .value_name("VALUE")
                    .value_parser(value_parser!(f64))
                    .help(format!("Override the {name} threshold")),
            )
        })
    })
}

fn tolerances(m: &ArgMatches) -> std::collections::BTreeMap<String, f64> {
    Thresholds::names()
        .into_iter()
        .filter_map(|name| m.get_one::<f64>(&name).map(|&v| (name, v)))
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_certificate(path: &Path) -> Result<Certificate, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Certificate::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_dims(n: usize) -> Result<(), Failure> {
    let d = dims(n)?;
    let status = if d.underdetermined { "UNDERDETERMINED" } else { "OVERDETERMINED" };
    println!("{:>3} {:>4} {:>5} {:>10} {:>9} {:>15}  system", "n", "N", "D", "equations", "unknowns", "solve_unknowns");
    println!(
        "{:>3} {:>4} {:>5} {:>10} {:>9} {:>15}  {status}",
        d.n, d.big_n, d.dim_u, d.embed_equations, d.embed_unknowns, d.solve_unknowns
    );
    Ok(())
}

fn cmd_certify(flags: RunConfig, file: Option<PathBuf>) -> Result<(), Failure> {
    let base = match file {
        Some(p) => RunConfig::load(&p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    let run = base.merge(flags).resolve().map_err(Failure::Usage)?;
    let pool = thread_pool()?;
    let cert = pool.install(|| certify(&run.search))?;
    let json = cert.to_json()?;
    fs::write(&run.out, json + "\n").map_err(|e| Failure::Usage(format!("cannot write {}: {e}", run.out.display())))?;
    match (&cert.failure, &cert.margins) {
        (None, Some(m)) => {
            println!(
                "CERTIFIED n={} seed={} candidate={} tried={} r={:e} delta1={} -> {}",
                cert.n,
                cert.seed,
                cert.candidate_index.unwrap_or_default(),
                cert.search.tried,
                m.radius,
                m.delta1,
                run.out.display()
            );
            Ok(())
        }
        (Some(f), _) if f.kind == "exhaustion" => {
            eprintln!("{}; failures {:?} -> {}", f.message, cert.search.failures, run.out.display());
            Err(Failure::Exhausted)
        }
        (Some(f), _) => Err(Failure::Internal(f.message.clone())),
        (None, None) => Err(Failure::Internal("certificate without margins".into())),
    }
}

fn cmd_plot(path: &Path, from: usize, to: Option<usize>, u: usize, v: usize, out: Option<&Path>) -> Result<(), Failure> {
    let cert = read_certificate(path)?;
    let conf = cert
        .configuration
        .ok_or_else(|| Failure::Usage(format!("{} has no configuration (status {})", path.display(), cert.status)))?;
    let to = to.unwrap_or(conf.xi.len());
    let rows = plot::rows(&conf, from, to, u, v).map_err(Failure::Usage)?;
    let mut buf = Vec::new();
    plot::write_csv(&mut buf, &rows).map_err(Failure::Internal)?;
    emit(out, &String::from_utf8_lossy(&buf))
}

fn cmd_sweep(path: &Path, grid: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let cert = read_certificate(path)?;
    let grid = grid.unwrap_or(cert.thresholds.grid);
    if grid == 0 {
        return Err(Failure::Usage("grid must be positive".into()));
    }
    let rep = resweep(&cert, grid)?;
    let json = serde_json::to_string_pretty(&rep).map_err(|e| Failure::Internal(e.to_string()))?;
    emit(out, &(json + "\n"))
}

fn run(m: &ArgMatches) -> Result<(), Failure> {
    let cli = Cli::from_arg_matches(m).map_err(|e| Failure::Usage(e.to_string()))?;
    match cli.command {
        Cmd::Dims { n } => cmd_dims(n),
        Cmd::Certify { config, n, seed, budget, out } => {
            let tolerances = m.subcommand_matches("certify").map(tolerances).unwrap_or_default();
            cmd_certify(RunConfig { command: None, n, seed, budget, out, tolerances }, config)
        }
        Cmd::Plot { certificate, from, to, u, v, out } => cmd_plot(&certificate, from, to, u, v, out.as_deref()),
        Cmd::Sweep { certificate, grid, out } => cmd_sweep(&certificate, grid, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let m = command().get_matches();
    match run(&m) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Exhausted) => ExitCode::from(EXIT_EXHAUSTED),
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
