//! `scl`: exact and sampled statistics of random surface-group actions.

mod commands;
mod config;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use scl_core::verify::Method;
use scl_core::{Error, Result};

use config::{Config, Format};
use report::Report;

#[derive(Parser, Debug)]
#[command(name = "scl", version, about = "Fixed points and cycles of random permutation representations of surface groups")]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Genus of the surface (at least 2) [default: 2].
    #[arg(short = 'g', long, global = true)]
    genus: Option<u32>,
    /// Observable spec text or JSON; `@path` reads it from a file.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Monte Carlo sample count [default: 100000].
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// RNG seed [default: 2024].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum homomorphisms an enumeration may visit [default: 1e9].
    #[arg(long, global = true, value_name = "N")]
    budget_visits: Option<u128>,
    /// Largest n whose commutator pairs may be stored [default: 7].
    #[arg(long, global = true, value_name = "N")]
    budget_materialized_n: Option<usize>,
    /// Output format [default: json].
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add `runtime_ms` to reports (makes output time-dependent).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Experiment {
    /// Comma-separated, strictly increasing values of n.
    #[arg(long, value_delimiter = ',', required = true)]
    n_values: Vec<usize>,
    #[arg(long, default_value = "auto", value_parser = ["enumerate", "sample", "auto"])]
    method: String,
    /// Width of the acceptance band in standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Character table of S_n (rows λ, columns μ).
    Characters {
        #[arg(short)]
        n: usize,
    },
    /// Σ_λ dim(λ)^{-s} over irreducibles of S_n, exactly.
    Zeta {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        s: u32,
    },
    /// |Hom(Γ_g, S_n)|.
    HomCount {
        #[arg(short)]
        n: usize,
    },
    /// Exact expectation of the spec by enumerating Hom(Γ_g, S_n).
    Enumerate {
        #[arg(short)]
        n: usize,
    },
    /// Uniform samples from Hom(Γ_g, S_n) in cycle notation.
    Sample {
        #[arg(short)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Monte Carlo estimate of the spec.
    Estimate {
        #[arg(short)]
        n: usize,
    },
    /// Large-n limit of the spec as an exact rational.
    Predict,
    /// Joint moment against its limit for several n.
    VerifyConvergence(Experiment),
    /// Joint moment against the product of group moments for several n.
    VerifyIndependence(Experiment),
    /// Short-cycle counts against their Poisson limits.
    VerifyCycles {
        #[command(flatten)]
        experiment: Experiment,
        /// A word to track; repeat for several.
        #[arg(long = "word", required = true)]
        words: Vec<String>,
        #[arg(long, default_value_t = 3)]
        max_d: usize,
    },
    /// Run the acceptance criteria (all, or the listed ids).
    Selftest { ids: Vec<u32> },
}

fn build_config(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    if let Some(g) = cli.genus {
        cfg.set("genus", &g.to_string())?;
    }
    if let Some(s) = cli.samples {
        cfg.samples = s;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(v) = cli.budget_visits {
        cfg.budget.max_visits = v;
    }
    if let Some(v) = cli.budget_materialized_n {
        cfg.budget.max_materialized_n = v;
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse()?;
    }
    if let Some(spec) = &cli.spec {
        cfg.spec = Some(spec.clone());
    }
    if let Some(path) = cfg.spec.as_deref().and_then(|s| s.strip_prefix('@')) {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))?;
        cfg.spec = Some(text);
    }
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SCL_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("SCL_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli, cfg: &Config) -> Result<Report> {
    let start = cli.timings.then(Instant::now);
    let method = |e: &Experiment| e.method.parse::<Method>();
    match &cli.command {
        Command::Characters { n } => commands::characters(*n),
        Command::Zeta { n, s } => commands::zeta(*n, *s),
        Command::HomCount { n } => commands::hom_count_report(*n, cfg),
        Command::Enumerate { n } => commands::enumerate(*n, cfg, start),
        Command::Sample { n, count } => commands::sample(*n, *count, cfg),
        Command::Estimate { n } => commands::estimate(*n, cfg, start),
        Command::Predict => commands::predict(cfg),
        Command::VerifyConvergence(e) => commands::verify_convergence(cfg, e.n_values.clone(), method(e)?, e.sigmas),
        Command::VerifyIndependence(e) => {
            commands::verify_independence(cfg, e.n_values.clone(), method(e)?, e.sigmas)
        }
        Command::VerifyCycles {
            experiment: e,
            words,
            max_d,
        } => commands::verify_cycles(cfg, words, *max_d, e.n_values.clone(), method(e)?, e.sigmas),
        Command::Selftest { ids } => commands::selftest(cfg, ids),
    }
}

fn emit(report: &Report, format: Format, out: Option<&PathBuf>) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write_to(format, &mut w)
        }
        None => report.write_to(format, &mut io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads()
        .and_then(|()| build_config(&cli))
        .and_then(|cfg| run(&cli, &cfg).map(|r| (r, cfg.format)));
    let (report, format) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, format, cli.out.as_ref()) {
        let _ = writeln!(io::stderr(), "error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
