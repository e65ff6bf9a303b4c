use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsm_core::cli::{cmd_price, cmd_scan, cmd_simulate, CliError, RunConfig};
use lsm_core::{Family, FigureId, Solver, TimeWindow};

/// Least-squares Monte Carlo pricing and regression-conditioning scans.
#[derive(Parser)]
#[command(name = "lsm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write them as CSV.
    Simulate(CommonArgs),
    /// Price a Bermudan option by backward induction.
    Price(CommonArgs),
    /// Scan the design-matrix condition number over exercise dates.
    Scan(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration layered over the defaults (or the --figure preset).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a figure preset: fig1 or fig2.
    #[arg(long)]
    figure: Option<String>,
    /// RNG seed; falls back to the config file, then LSM_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated paths N.
    #[arg(long)]
    paths: Option<i64>,
    /// Number of time steps M.
    #[arg(long)]
    steps: Option<i64>,
    /// normal, qr or svd.
    #[arg(long)]
    solver: Option<String>,
    /// monomial, laguerre, legendre, chebyshev or hermite.
    #[arg(long)]
    basis: Option<String>,
    /// Number of basis functions.
    #[arg(long = "K")]
    k: Option<i64>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log-log fit window as t_lo:t_hi.
    #[arg(long)]
    window: Option<String>,
    /// Read paths from a CSV written by `simulate` instead of simulating.
    #[arg(long = "paths-file")]
    paths_file: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let figure = self
            .figure
            .as_deref()
            .map(|f| f.parse::<FigureId>().map_err(|e| CliError::Config(e.to_string())))
            .transpose()?;
        let mut cfg = figure.map(RunConfig::from_figure).unwrap_or_default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            cfg = cfg.overlay_json(&text)?;
        }
        if let Some(seed) = self.seed {
            cfg.simulation.seed = Some(seed);
        }
        if let Some(n) = self.paths {
            cfg.simulation.paths = n;
        }
        if let Some(m) = self.steps {
            cfg.grid.steps = m;
        }
        if let Some(s) = &self.solver {
            cfg.solver.name = s.parse::<Solver>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(b) = &self.basis {
            cfg.basis.family = b.parse::<Family>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(k) = self.k {
            cfg.basis.k = k;
        }
        if let Some(out) = &self.out {
            cfg.output.path = Some(out.clone());
        }
        if let Some(w) = &self.window {
            let w: TimeWindow = w.parse().map_err(|e: lsm_core::LsmError| CliError::Config(e.to_string()))?;
            cfg.scan.t_lo = w.lo;
            cfg.scan.t_hi = w.hi;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let out = cfg.output.path.clone();
            let s = cmd_simulate(&cfg, out.as_deref())?;
            let line = format!("simulated N = {}, M = {}, seed = {}", s.n_paths, s.steps, s.seed);
            if out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Command::Price(args) => {
            let cfg = args.resolve()?;
            let report = cmd_price(&cfg, args.paths_file.as_deref(), cfg.output.path.as_deref())?;
            print!("{}", report.render());
        }
        Command::Scan(args) => {
            let cfg = args.resolve()?;
            let out = cfg.output.path.clone();
            let report = cmd_scan(&cfg, args.figure.is_some(), args.paths_file.as_deref(), out.as_deref())?;
            if out.is_some() {
                print!("{}", report.render());
            } else {
                eprint!("{}", report.render());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
