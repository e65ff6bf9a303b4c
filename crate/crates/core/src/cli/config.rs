//! JSON run configuration: presets, layering and validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::basis::{BasisSet, Family, Rescale};
use crate::lsm::{LsmSettings, Payoff, PayoffKind, RatePlan};
use crate::paths::{ModelKind, Scheme, SdeModel, TimeGrid};
use crate::regress::Solver;
use crate::stability::{FigureConfig, FigureId, TimeWindow, FIGURE_T_MIN};

use super::CliError;

/// Seed used when neither a flag, the config file nor `LSM_SEED` provides one.
pub const DEFAULT_SEED: u64 = crate::stability::DEFAULT_FIGURE_SEED;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "M")]
    pub steps: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(rename = "N")]
    pub paths: i64,
    pub scheme: Scheme,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub family: Family,
    #[serde(rename = "K")]
    pub k: i64,
    pub rescale: Option<Rescale>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffConfig {
    pub kind: PayoffKind,
    pub strike: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub name: Solver,
    pub rank_tolerance: Option<f64>,
    pub itm_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: String,
}

/// Log-log fit window (t_lo, t_hi] for `scan`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub simulation: SimulationConfig,
    pub basis: BasisConfig,
    pub payoff: PayoffConfig,
    pub rate: RateConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
    pub scan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_figure(FigureId::Fig1)
    }
}

impl RunConfig {
    pub fn from_figure(id: FigureId) -> Self {
        let f = FigureConfig::preset(id);
        Self {
            model: ModelConfig { kind: f.kind, mu: f.mu, sigma: f.sigma, x0: f.x0 },
            grid: GridConfig { horizon: f.horizon, steps: f.steps as i64 },
            simulation: SimulationConfig { paths: f.n_paths as i64, scheme: f.scheme, seed: None },
            basis: BasisConfig { family: f.family, k: f.k as i64, rescale: None },
            payoff: PayoffConfig { kind: PayoffKind::Put, strike: 1.1 },
            rate: RateConfig { r: 0.0 },
            solver: SolverConfig { name: Solver::TruncatedSvd, rank_tolerance: None, itm_only: false },
            output: OutputConfig { path: None, format: "csv".into() },
            scan: ScanConfig { t_lo: FIGURE_T_MIN, t_hi: 0.2 },
        }
    }

    /// Overlay a (possibly partial) JSON document on this config.
    pub fn overlay_json(&self, text: &str) -> Result<Self, CliError> {
        let patch: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let mut base = serde_json::to_value(self).expect("config serializes");
        merge(&mut base, patch);
        serde_json::from_value(base).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Seed resolution after flags and file: `LSM_SEED`, then the default.
    pub fn resolved_seed(&self) -> Result<u64, CliError> {
        if let Some(seed) = self.simulation.seed {
            return Ok(seed);
        }
        match std::env::var("LSM_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("LSM_SEED: not an unsigned integer: {v:?}"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    /// Check every field; the first violation is reported with its path.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |path: &str, msg: String| Err(CliError::Config(format!("{path}: {msg}")));
        let m = &self.model;
        if !m.mu.is_finite() {
            return fail("model.mu", format!("must be finite (got {})", m.mu));
        }
        if !(m.sigma.is_finite() && m.sigma >= 0.0) {
            return fail("model.sigma", format!("must be >= 0 (got {})", m.sigma));
        }
        if !(m.x0.is_finite() && m.x0 > 0.0) {
            return fail("model.x0", format!("must be > 0 (got {})", m.x0));
        }
        if !(self.grid.horizon.is_finite() && self.grid.horizon > 0.0) {
            return fail("grid.T", format!("must be > 0 (got {})", self.grid.horizon));
        }
        if self.grid.steps < 2 {
            return fail("grid.M", format!("must be >= 2 (got {})", self.grid.steps));
        }
        if self.simulation.paths < 1 {
            return fail("simulation.N", format!("must be >= 1 (got {})", self.simulation.paths));
        }
        if self.basis.k < 1 {
            return fail("basis.K", format!("must be >= 1 (got {})", self.basis.k));
        }
        if let Some(r) = self.basis.rescale {
            if !(r.scale.is_finite() && r.scale != 0.0) {
                return fail("basis.rescale.scale", format!("must be finite and nonzero (got {})", r.scale));
            }
            if !r.shift.is_finite() {
                return fail("basis.rescale.shift", format!("must be finite (got {})", r.shift));
            }
        }
        if !(self.payoff.strike.is_finite() && self.payoff.strike > 0.0) {
            return fail("payoff.strike", format!("must be > 0 (got {})", self.payoff.strike));
        }
        if !(self.rate.r.is_finite() && self.rate.r >= 0.0) {
            return fail("rate.r", format!("must be >= 0 (got {})", self.rate.r));
        }
        if let Some(tol) = self.solver.rank_tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return fail("solver.rank_tolerance", format!("must be >= 0 (got {tol})"));
            }
        }
        if self.output.format != "csv" {
            return fail("output.format", format!("only \"csv\" is supported (got {:?})", self.output.format));
        }
        if TimeWindow::new(self.scan.t_lo, self.scan.t_hi).is_err() {
            return fail(
                "scan",
                format!("t_lo must be below t_hi (got {}, {})", self.scan.t_lo, self.scan.t_hi),
            );
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SdeModel, CliError> {
        SdeModel::new(self.model.kind, self.model.mu, self.model.sigma, self.model.x0).map_err(CliError::config)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.grid.horizon, self.grid.steps as usize).map_err(CliError::config)
    }

    pub fn basis_set(&self) -> Result<BasisSet, CliError> {
        let b = BasisSet::new(self.basis.family, self.basis.k as usize).map_err(CliError::config)?;
        match self.basis.rescale {
            Some(r) => b.with_rescale(r).map_err(CliError::config),
            None => Ok(b),
        }
    }

    pub fn payoff(&self) -> Result<Payoff, CliError> {
        Payoff::new(self.payoff.kind, self.payoff.strike).map_err(CliError::config)
    }

    pub fn rate_plan(&self) -> Result<RatePlan, CliError> {
        RatePlan::constant(self.rate.r).map_err(CliError::config)
    }

    pub fn lsm_settings(&self) -> LsmSettings {
        LsmSettings {
            solver: self.solver.name,
            rank_tolerance: self.solver.rank_tolerance,
            itm_only: self.solver.itm_only,
        }
    }

    pub fn window(&self) -> Result<TimeWindow, CliError> {
        TimeWindow::new(self.scan.t_lo, self.scan.t_hi).map_err(CliError::config)
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
