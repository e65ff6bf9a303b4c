//! Least-squares Monte Carlo (Longstaff-Schwartz) pricing of Bermudan options,
//! instrumented to measure how the per-date regression degrades as exercise
//! dates approach t = 0.
//!
//! The pipeline is [`paths::simulate`] -> [`basis::design_matrix`] ->
//! [`regress`] solvers -> [`lsm::lsm_price`], with [`stability`] scanning the
//! condition number kappa(t) of each design matrix.

pub mod basis;
pub mod cli;

pub mod error;
pub mod lsm;
pub mod paths;
pub mod regress;
pub mod rng;
pub mod stability;

pub use basis::{design_matrix, evaluate_basis, BasisSet, DesignMatrix, Family, Rescale};
pub use error::{LsmError, Result};
pub use lsm::{discount_factor, european_price, lsm_price, payoff_value, LsmSettings, Payoff, PayoffKind, PriceEstimate, RatePlan};
pub use paths::{build_time_grid, simulate, ModelKind, PathSet, Scheme, SdeModel, TimeGrid};
pub use regress::{
    condition_number, gram_at_zero, singular_values, solve_normal_equations, solve_qr, solve_svd, LsSolution, Solver,
};
pub use stability::{
    fit_loglog_slope, reproduce_figure, scan_condition_numbers, verify_proposition_one, ConditionScan, FigureConfig,
    FigureId, SlopeFit, TimeWindow,
};
