//! Command implementations behind the `lsm` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or usage,
//! 3 regression solver failure, 4 insufficient data for the log-log fit.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::error::LsmError;
use crate::lsm::{lsm_price, PriceEstimate};
use crate::paths::{simulate, PathSet, TimeGrid};
use crate::stability::{
    fit_loglog_slope, scan_condition_numbers, trend_correlation, ConditionScan, ScanPoint, SlopeFit, FIGURE_T_MIN,
};

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(LsmError),
    #[error("{0}")]
    InsufficientData(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::InsufficientData(_) => 4,
        }
    }

    pub(crate) fn config(e: LsmError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<LsmError> for CliError {
    fn from(e: LsmError) -> Self {
        match e {
            LsmError::SolverFailed { .. } | LsmError::SingularSystem { .. } | LsmError::RankDeficient { .. } => {
                CliError::Solver(e)
            }
            LsmError::InsufficientData(msg) => CliError::InsufficientData(format!("insufficient data: {msg}")),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_err(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

/// Where a command writes its CSV.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_err(&format!("cannot create {}", p.display()), e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Path CSV: `path_index,t_0,...,t_M`, one row per path.
pub fn write_paths_csv<W: Write>(paths: &PathSet, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let width = paths.grid().steps() + 1;
    let mut header = Vec::with_capacity(width + 1);
    header.push("path_index".to_string());
    header.extend((0..width).map(|m| format!("t_{m}")));
    w.write_record(&header).map_err(|e| io_err("writing paths", e))?;
    let mut record = Vec::with_capacity(width + 1);
    for (n, row) in paths.paths().enumerate() {
        record.clear();
        record.push(n.to_string());
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(|e| io_err("writing paths", e))?;
    }
    w.flush().map_err(|e| io_err("writing paths", e))
}

/// Read a path CSV written by [`write_paths_csv`]. The horizon comes from the
/// caller; M is the number of date columns minus one.
pub fn read_paths_csv<R: Read>(input: R, horizon: f64, seed: u64) -> Result<PathSet, CliError> {
    let bad = |msg: String| CliError::Config(format!("paths file: {msg}"));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 4 || &header[0] != "path_index" {
        return Err(bad("header must be path_index,t_0,...,t_M with M >= 2".into()));
    }
    for (m, name) in header.iter().skip(1).enumerate() {
        if name != format!("t_{m}") {
            return Err(bad(format!("column {} is {name:?}, expected \"t_{m}\"", m + 1)));
        }
    }
    let steps = header.len() - 2;
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("record {}: {e}", line + 1)))?;
        rows.push(row);
    }
    let grid = TimeGrid::new(horizon, steps).map_err(CliError::config)?;
    PathSet::from_rows(grid, rows, seed).map_err(|e| bad(e.to_string()))
}

fn load_or_simulate(cfg: &RunConfig, paths_file: Option<&Path>) -> Result<PathSet, CliError> {
    let seed = cfg.resolved_seed()?;
    match paths_file {
        Some(p) => {
            let f = File::open(p).map_err(|e| io_err(&format!("cannot open {}", p.display()), e))?;
            read_paths_csv(io::BufReader::new(f), cfg.grid.horizon, seed)
        }
        None => Ok(simulate(
            &cfg.model()?,
            &cfg.time_grid()?,
            cfg.simulation.paths as usize,
            cfg.simulation.scheme,
            seed,
        )?),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateSummary {
    pub n_paths: usize,
    pub steps: usize,
    pub seed: u64,
}

pub fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<SimulateSummary, CliError> {
    cfg.validate()?;
    let paths = load_or_simulate(cfg, None)?;
    write_paths_csv(&paths, open_output(out)?)?;
    Ok(SimulateSummary { n_paths: paths.n_paths(), steps: paths.grid().steps(), seed: paths.seed() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceReport {
    pub estimate: PriceEstimate,
    pub dates: Vec<f64>,
}

/// (date index, t, kappa) of one exercise date.
pub type KappaAt = (usize, f64, f64);

impl PriceReport {
    /// Smallest and largest per-date kappa.
    pub fn kappa_extremes(&self) -> Option<(KappaAt, KappaAt)> {
        let ks = &self.estimate.per_date_kappa;
        let idx_min = (0..ks.len()).min_by(|&a, &b| ks[a].total_cmp(&ks[b]))?;
        let idx_max = (0..ks.len()).max_by(|&a, &b| ks[a].total_cmp(&ks[b]))?;
        let at = |i: usize| (i + 1, self.dates[i], ks[i]);
        Some((at(idx_min), at(idx_max)))
    }

    pub fn kappa_scan(&self) -> ConditionScan {
        let points = self
            .estimate
            .per_date_kappa
            .iter()
            .enumerate()
            .map(|(i, &kappa)| ScanPoint { date_index: i + 1, t: self.dates[i], kappa })
            .collect();
        ConditionScan { points, config_digest: String::from("lsm_price") }
    }

    pub fn render(&self) -> String {
        let e = &self.estimate;
        let mut s = format!(
            "value: {}\nstandard_error: {}\nexercised_at_zero: {}\n",
            e.value, e.standard_error, e.exercised_at_zero
        );
        if let Some(((m_lo, t_lo, k_lo), (m_hi, t_hi, k_hi))) = self.kappa_extremes() {
            s.push_str(&format!(
                "kappa_min: {} (date index {m_lo}, t = {t_lo})\nkappa_max: {} (date index {m_hi}, t = {t_hi})\n",
                fmt_kappa(k_lo),
                fmt_kappa(k_hi)
            ));
        }
        s
    }
}

fn fmt_kappa(k: f64) -> String {
    if k.is_infinite() {
        "inf".into()
    } else {
        k.to_string()
    }
}

pub fn cmd_price(
    cfg: &RunConfig,
    paths_file: Option<&Path>,
    kappa_out: Option<&Path>,
) -> Result<PriceReport, CliError> {
    cfg.validate()?;
    let paths = load_or_simulate(cfg, paths_file)?;
    let estimate = lsm_price(&paths, &cfg.payoff()?, &cfg.basis_set()?, &cfg.rate_plan()?, &cfg.lsm_settings())?;
    let dates = paths.grid().nodes()[1..paths.grid().steps()].to_vec();
    let report = PriceReport { estimate, dates };
    if let Some(p) = kappa_out {
        report.kappa_scan().write_csv(open_output(Some(p))?)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub scan: ConditionScan,
    pub fit: SlopeFit,
    pub correlation: f64,
}

impl ScanReport {
    pub fn render(&self) -> String {
        format!(
            "window: ({}, {}]\npoints_used: {}\nslope: {}\nintercept: {}\nspearman: {}\n",
            self.fit.t_window.lo,
            self.fit.t_window.hi,
            self.fit.points_used,
            self.fit.slope,
            self.fit.intercept,
            self.correlation
        )
    }
}

/// Scan kappa(t), write the CSV, then fit. The CSV is written even when the
/// fit fails for lack of finite points.
pub fn cmd_scan(
    cfg: &RunConfig,
    figure_mode: bool,
    paths_file: Option<&Path>,
    out: Option<&Path>,
) -> Result<ScanReport, CliError> {
    cfg.validate()?;
    let paths = load_or_simulate(cfg, paths_file)?;
    let mut scan = scan_condition_numbers(&paths, &cfg.basis_set()?)?;
    if figure_mode {
        scan.points.retain(|p| p.t > FIGURE_T_MIN);
    }
    scan.write_csv(open_output(out)?)?;
    let window = cfg.window()?;
    let fit = fit_loglog_slope(&scan, window)?;
    let correlation = trend_correlation(&scan, window)?;
    Ok(ScanReport { scan, fit, correlation })
}
