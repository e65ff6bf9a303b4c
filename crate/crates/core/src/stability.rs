//! Condition-number scans over the exercise dates and the small-t blow-up
//! of the regression problem.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basis::{BasisSet, Family};
use crate::error::{LsmError, Result};
use crate::paths::{simulate, ModelKind, PathSet, Scheme, SdeModel, TimeGrid};
use crate::regress::{condition_number, default_rank_tolerance, gram_at_zero, singular_values};

/// Lower edge of the plotted t-range, exclusive.
pub const FIGURE_T_MIN: f64 = 0.009;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub date_index: usize,
    pub t: f64,
    /// `f64::INFINITY` for numerically rank-deficient dates.
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionScan {
    pub points: Vec<ScanPoint>,
    pub config_digest: String,
}

impl ConditionScan {
    fn finite_in(&self, window: TimeWindow) -> impl Iterator<Item = &ScanPoint> {
        self.points
            .iter()
            .filter(move |p| window.contains(p.t) && p.kappa.is_finite())
    }

    /// kappa at the interior date closest to `t`.
    pub fn kappa_near(&self, t: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|p| p.kappa)
    }

    /// CSV with header `t,kappa,ln_t,ln_kappa,is_infinite`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| LsmError::invalid(format!("csv write failed: {e}"));
        w.write_record(["t", "kappa", "ln_t", "ln_kappa", "is_infinite"]).map_err(io)?;
        for p in &self.points {
            let t = p.t.to_string();
            let ln_t = p.t.ln().to_string();
            if p.kappa.is_finite() {
                w.write_record([t, p.kappa.to_string(), ln_t, p.kappa.ln().to_string(), "false".into()])
                    .map_err(io)?;
            } else {
                w.write_record([t, String::new(), ln_t, String::new(), "true".into()]).map_err(io)?;
            }
        }
        w.flush().map_err(|e| LsmError::invalid(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Half-open interval (lo, hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(LsmError::invalid(format!("window ({lo}, {hi}] is empty or not finite")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t <= self.hi
    }
}

impl std::str::FromStr for TimeWindow {
    type Err = LsmError;

    /// Parses `lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| LsmError::invalid(format!("window {s:?} must look like lo:hi")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| LsmError::invalid(format!("window bound {v:?} is not a number")))
        };
        TimeWindow::new(parse(lo)?, parse(hi)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub t_window: TimeWindow,
    pub points_used: usize,
}

/// kappa(t_m) for every interior date m = 1..M-1.
pub fn scan_condition_numbers(paths: &PathSet, basis: &BasisSet) -> Result<ConditionScan> {
    let grid = paths.grid();
    let points = (1..grid.steps())
        .into_par_iter()
        .map(|m| {
            let a = basis.matrix(&paths.column(m))?;
            let kappa = condition_number(&a).unwrap_or(f64::INFINITY);
            Ok(ScanPoint { date_index: m, t: grid.t(m), kappa })
        })
        .collect::<Result<Vec<_>>>()?;
    let config_digest = format!(
        "N={} M={} T={} seed={} basis={} K={}",
        paths.n_paths(),
        grid.steps(),
        grid.horizon(),
        paths.seed(),
        basis.family(),
        basis.len()
    );
    Ok(ConditionScan { points, config_digest })
}

/// Least squares of ln kappa on ln t over finite points with t in the window.
pub fn fit_loglog_slope(scan: &ConditionScan, window: TimeWindow) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = scan
        .finite_in(window)
        .map(|p| (p.t.ln(), p.kappa.ln()))
        .unzip();
    let n = xs.len();
    if n < 2 {
        return Err(LsmError::InsufficientData(format!(
            "{n} finite condition numbers in ({}, {}], need at least 2",
            window.lo, window.hi
        )));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(LsmError::InsufficientData("all usable points share one date".into()));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit { slope, intercept: my - slope * mx, t_window: window, points_used: n })
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (ties get average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman correlation of ln kappa against ln t over finite points in the window.
pub fn trend_correlation(scan: &ConditionScan, window: TimeWindow) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = scan
        .finite_in(window)
        .map(|p| (p.t.ln(), p.kappa.ln()))
        .unzip();
    spearman(&xs, &ys).ok_or_else(|| {
        LsmError::InsufficientData(format!(
            "cannot rank-correlate {} finite points in ({}, {}]",
            xs.len(),
            window.lo,
            window.hi
        ))
    })
}

/// Outcome of the t = 0 analytic check.
#[derive(Clone, Debug, PartialEq)]
pub struct PropositionReport {
    pub n_paths: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// sqrt(N * sum_k f_k(x0)^2)
    pub expected_leading: f64,
    pub kappa: f64,
    /// Eigenvalues of the closed-form (A^T A)(0) / N, descending.
    pub gram_eigenvalues: Vec<f64>,
    /// sum_k f_k(x0)^2
    pub basis_energy: f64,
    pub leading_matches: bool,
    pub gram_matches: bool,
}

impl PropositionReport {
    /// Rank one, leading singular value as predicted, and kappa infinite
    /// whenever K >= 2 (kappa = 1 when K = 1).
    pub fn holds(&self) -> bool {
        let k = self.gram_eigenvalues.len();
        let kappa_ok = if k >= 2 { self.kappa.is_infinite() } else { self.kappa == 1.0 };
        self.rank == 1 && self.leading_matches && self.gram_matches && kappa_ok
    }
}

/// Build the t = 0 design matrix (N identical rows) and check it against the
/// closed-form Gram matrix and its spectrum.
pub fn verify_proposition_one(basis: &BasisSet, x0: f64, n_paths: usize) -> Result<PropositionReport> {
    if n_paths == 0 {
        return Err(LsmError::invalid("N must be >= 1"));
    }
    let gram = gram_at_zero(basis, x0)?;
    let row = basis.evaluate(x0)?;
    let k = row.len();
    let basis_energy: f64 = row.iter().map(|v| v * v).sum();
    let a = DMatrix::from_fn(n_paths, k, |_, j| row[j]);

    let sigma = singular_values(&a)?;
    let cutoff = default_rank_tolerance(n_paths, k) * sigma[0];
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    let kappa = condition_number(&a)?;
    let expected_leading = (n_paths as f64 * basis_energy).sqrt();
    let leading_matches = (sigma[0] - expected_leading).abs() <= 1e-10 * expected_leading;

    let mut gram_eigenvalues: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    gram_eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let gram_matches = (gram_eigenvalues[0] - basis_energy).abs() <= 1e-8 * basis_energy.max(1.0)
        && gram_eigenvalues[1..].iter().all(|e| e.abs() <= 1e-8 * basis_energy.max(1.0));

    Ok(PropositionReport {
        n_paths,
        rank,
        singular_values: sigma,
        expected_leading,
        kappa,
        gram_eigenvalues,
        basis_energy,
        leading_matches,
        gram_matches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    /// Lognormal, sigma = 0.15, Milstein.
    Fig1,
    /// Arithmetic (normal), sigma = 0.03, Euler.
    Fig2,
}

impl std::str::FromStr for FigureId {
    type Err = LsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            _ => Err(LsmError::invalid(format!("unknown figure {s:?} (expected fig1 or fig2)"))),
        }
    }
}

/// Everything needed to regenerate one of the two conditioning figures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureConfig {
    pub kind: ModelKind,
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
    pub horizon: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub scheme: Scheme,
    pub family: Family,
    pub k: usize,
    pub seed: u64,
}

pub const DEFAULT_FIGURE_SEED: u64 = 2011;

impl FigureConfig {
    pub fn preset(id: FigureId) -> Self {
        let (kind, sigma, scheme) = match id {
            FigureId::Fig1 => (ModelKind::Lognormal, 0.15, Scheme::Milstein),
            FigureId::Fig2 => (ModelKind::Arithmetic, 0.03, Scheme::Euler),
        };
        Self {
            kind,
            mu: 0.0,
            sigma,
            x0: 1.0,
            horizon: 1.0,
            steps: 100,
            n_paths: 30_000,
            scheme,
            family: Family::Monomial,
            k: 3,
            seed: DEFAULT_FIGURE_SEED,
        }
    }

    pub fn with_paths(mut self, n_paths: usize) -> Self {
        self.n_paths = n_paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn simulate(&self) -> Result<PathSet> {
        let model = SdeModel::new(self.kind, self.mu, self.sigma, self.x0)?;
        let grid = TimeGrid::new(self.horizon, self.steps)?;
        simulate(&model, &grid, self.n_paths, self.scheme, self.seed)
    }

    pub fn basis(&self) -> Result<BasisSet> {
        BasisSet::new(self.family, self.k)
    }
}

/// Scan for a figure preset, keeping dates with t > 0.009.
pub fn reproduce_figure(config: &FigureConfig) -> Result<ConditionScan> {
    let paths = config.simulate()?;
    let mut scan = scan_condition_numbers(&paths, &config.basis()?)?;
    scan.points.retain(|p| p.t > FIGURE_T_MIN);
    let mut digest = String::new();
    let _ = write!(
        digest,
        "{:?} mu={} sigma={} x0={} scheme={:?} {}",
        config.kind, config.mu, config.sigma, config.x0, config.scheme, scan.config_digest
    );
    scan.config_digest = digest;
    Ok(scan)
}
