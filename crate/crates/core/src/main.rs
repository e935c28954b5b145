use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use railbeam::cli::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "railbeam",
    version,
    about = "Energy-efficient beam power allocation for train-to-ground mmWave links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Do not print the resolved configuration to stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic scheme comparison over a parameter sweep (CSV).
    Sweep,
    /// Scheme statistics under velocity-estimation error (CSV).
    Montecarlo,
    /// Infinite-segment energy and its finite-N convergence.
    Limit,
    /// Per-segment powers and constraint residual at one operating point.
    Allocate,
}

/// Dimensioned values need a unit, e.g. `--dl "120 m"`, `--v 300km/h`.
#[derive(Args)]
struct Params {
    #[arg(long, global = true)]
    d0: Option<String>,
    #[arg(long, global = true)]
    dl: Option<String>,
    #[arg(long, global = true)]
    v: Option<String>,
    #[arg(long, global = true)]
    n_segments: Option<String>,
    /// Comma-separated list, e.g. "40 dBm, 50 dBm".
    #[arg(long, global = true)]
    p_ref: Option<String>,
    #[arg(long = "theta-3db", global = true)]
    theta_3db: Option<String>,
    #[arg(long, global = true)]
    shadowing: Option<String>,
    #[arg(long, global = true)]
    path_loss_exp: Option<String>,
    #[arg(long, global = true)]
    wavelength: Option<String>,
    #[arg(long, global = true)]
    bandwidth: Option<String>,
    #[arg(long, global = true)]
    noise_figure: Option<String>,
    /// paper-literal or physical.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Comma-separated scheme names, or "all".
    #[arg(long, global = true)]
    schemes: Option<String>,
    /// var:start:stop:step with var one of dl, v, n_segments.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Absolute ("1.5 m/s") or relative to v ("1 %").
    #[arg(long, global = true)]
    sigma_v: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Also report the infinite-segment closed form exactly as printed.
    #[arg(long, global = true)]
    eq40_as_printed: bool,
}

impl Params {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let opts = [
            ("d0", &self.d0),
            ("dl", &self.dl),
            ("v", &self.v),
            ("n_segments", &self.n_segments),
            ("p_ref", &self.p_ref),
            ("theta_3db", &self.theta_3db),
            ("shadowing", &self.shadowing),
            ("path_loss_exp", &self.path_loss_exp),
            ("wavelength", &self.wavelength),
            ("bandwidth", &self.bandwidth),
            ("noise_figure", &self.noise_figure),
            ("mode", &self.mode),
            ("schemes", &self.schemes),
            ("sweep", &self.sweep),
            ("sigma_v", &self.sigma_v),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        let mut pairs: Vec<_> = opts
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.eq40_as_printed {
            pairs.push(("eq40_as_printed", "true".to_string()));
        }
        pairs
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: Cli) -> Result<bool> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let file_text = match &args.config {
        Some(p) => {
            Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    let resolved = cli::resolve(file_text.as_deref(), &args.params.pairs())?;
    if !args.quiet {
        eprint!("# resolved configuration\n{}", resolved.echo());
    }
    let config = &resolved.config;
    let clean = match args.command {
        Command::Sweep => {
            let out = cli::run_sweep(config);
            emit(config, &out.text)?;
            out.error_rows == 0
        }
        Command::Montecarlo => {
            let out = cli::run_montecarlo_cmd(config);
            emit(config, &out.text)?;
            out.error_rows == 0
        }
        Command::Limit => {
            emit(config, &cli::run_limit_cmd(config)?)?;
            true
        }
        Command::Allocate => {
            emit(config, &cli::run_allocate_cmd(config)?)?;
            true
        }
    };
    if !clean {
        eprintln!("error: some rows failed; see the error column");
    }
    Ok(clean)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
