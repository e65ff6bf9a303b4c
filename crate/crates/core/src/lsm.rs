//! Longstaff-Schwartz backward induction on a simulated path set.

use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{LsmError, Result};
use crate::paths::PathSet;
use crate::regress::{self, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    Put,
    Call,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Payoff {
    kind: PayoffKind,
    strike: f64,
}

impl Payoff {
    pub fn new(kind: PayoffKind, strike: f64) -> Result<Self> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(LsmError::invalid(format!("strike must be > 0, got {strike}")));
        }
        Ok(Self { kind, strike })
    }

    pub fn put(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Put, strike)
    }

    pub fn call(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Call, strike)
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }
    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            PayoffKind::Put => (self.strike - x).max(0.0),
            PayoffKind::Call => (x - self.strike).max(0.0),
        }
    }
}

pub fn payoff_value(payoff: &Payoff, x: f64) -> f64 {
    payoff.value(x)
}

/// Constant deterministic short rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePlan {
    r: f64,
}

impl RatePlan {
    pub fn constant(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(LsmError::invalid(format!("rate must be >= 0, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn discount(&self, t_a: f64, t_b: f64) -> Result<f64> {
        if t_a > t_b {
            return Err(LsmError::invalid(format!("discount interval reversed: {t_a} > {t_b}")));
        }
        Ok((-self.r * (t_b - t_a)).exp())
    }
}

pub fn discount_factor(rate: &RatePlan, t_a: f64, t_b: f64) -> Result<f64> {
    rate.discount(t_a, t_b)
}

/// Per-path single cash flow and the date index at which it is received.
#[derive(Clone, Debug, PartialEq)]
pub struct CashFlows {
    pub amounts: Vec<f64>,
    pub dates: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsmSettings {
    pub solver: Solver,
    /// Relative singular value cutoff for the SVD solver.
    pub rank_tolerance: Option<f64>,
    /// Regress on in-the-money paths only.
    pub itm_only: bool,
}

impl LsmSettings {
    pub fn new(solver: Solver) -> Self {
        Self { solver, rank_tolerance: None, itm_only: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceEstimate {
    pub value: f64,
    pub standard_error: f64,
    /// kappa(t_m) for m = 1..M-1; `f64::INFINITY` for rank-deficient dates.
    pub per_date_kappa: Vec<f64>,
    pub exercised_at_zero: bool,
    pub cash_flows: CashFlows,
}

fn mean_and_standard_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Price with exercise only at the final date, on the same paths.
/// Returns `(value, standard_error)`.
pub fn european_price(paths: &PathSet, payoff: &Payoff, rate: &RatePlan) -> Result<(f64, f64)> {
    let grid = paths.grid();
    let m_last = grid.steps();
    let d = rate.discount(0.0, grid.t(m_last))?;
    let discounted: Vec<f64> = paths.paths().map(|p| d * payoff.value(p[m_last])).collect();
    Ok(mean_and_standard_error(&discounted))
}

/// Longstaff-Schwartz estimate of the Bermudan value exercisable at t_1..t_M
/// (and at t_0 by comparison with the immediate payoff).
pub fn lsm_price(
    paths: &PathSet,
    payoff: &Payoff,
    basis: &BasisSet,
    rate: &RatePlan,
    settings: &LsmSettings,
) -> Result<PriceEstimate> {
    let grid = paths.grid();
    let n = paths.n_paths();
    let k = basis.len();
    let last = grid.steps();
    if !settings.itm_only && n < k {
        return Err(LsmError::invalid(format!(
            "regression needs at least K = {k} paths, got N = {n}"
        )));
    }

    let mut amounts: Vec<f64> = paths.paths().map(|p| payoff.value(p[last])).collect();
    let mut dates = vec![last; n];
    let mut per_date_kappa = vec![f64::INFINITY; last - 1];
    let mut scratch = vec![0.0; k];

    for m in (1..last).rev() {
        let t_m = grid.t(m);
        let states = paths.column(m);
        let exercise: Vec<f64> = states.iter().map(|&x| payoff.value(x)).collect();

        let rows: Vec<usize> = if settings.itm_only {
            (0..n).filter(|&i| exercise[i] > 0.0).collect()
        } else {
            (0..n).collect()
        };
        if rows.is_empty() {
            // nothing in the money: no regression, no exercise
            continue;
        }

        let mut target = Vec::with_capacity(rows.len());
        for &i in &rows {
            target.push(amounts[i] * rate.discount(t_m, grid.t(dates[i]))?);
        }
        let regressors: Vec<f64> = rows.iter().map(|&i| states[i]).collect();
        let a = basis.matrix(&regressors)?;
        let fit = regress::solve(settings.solver, &a, &target, settings.rank_tolerance).map_err(|e| {
            LsmError::SolverFailed { date_index: m, t: t_m, source: Box::new(e) }
        })?;
        per_date_kappa[m - 1] = fit.kappa;

        for i in 0..n {
            if settings.itm_only && exercise[i] <= 0.0 {
                continue;
            }
            let continuation = basis.combine(&fit.coefficients, states[i], &mut scratch);
            // strict: ties continue
            if exercise[i] > continuation {
                amounts[i] = exercise[i];
                dates[i] = m;
            }
        }
    }

    let mut discounted = Vec::with_capacity(n);
    for i in 0..n {
        discounted.push(amounts[i] * rate.discount(0.0, grid.t(dates[i]))?);
    }
    let (continuation, standard_error) = mean_and_standard_error(&discounted);
    let immediate = payoff.value(paths.x0());
    let exercised_at_zero = immediate > continuation;

    Ok(PriceEstimate {
        value: if exercised_at_zero { immediate } else { continuation },
        standard_error,
        per_date_kappa,
        exercised_at_zero,
        cash_flows: CashFlows { amounts, dates },
    })
}
