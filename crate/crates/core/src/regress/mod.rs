//! Least-squares solvers for `A x = b` and conditioning diagnostics.
//!
//! All three solvers share one dense factorization route: Householder QR of
//! the N x K design matrix, then a one-sided Jacobi SVD of the K x K factor R.
//! Singular values of A are those of R, so condition numbers cost O(N K^2).

mod cholesky;
mod householder;
mod jacobi;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{LsmError, Result};

use householder::{back_substitute, HouseholderQr};
use jacobi::one_sided_jacobi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Solver {
    #[serde(rename = "normal")]
    NormalEquations,
    #[serde(rename = "qr")]
    HouseholderQr,
    #[serde(rename = "svd")]
    TruncatedSvd,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::NormalEquations, Solver::HouseholderQr, Solver::TruncatedSvd];

    pub fn name(self) -> &'static str {
        match self {
            Solver::NormalEquations => "normal",
            Solver::HouseholderQr => "qr",
            Solver::TruncatedSvd => "svd",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = LsmError;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| LsmError::invalid(format!("unknown solver {s:?} (expected normal, qr or svd)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsSolution {
    pub coefficients: Vec<f64>,
    pub solver: Solver,
    pub effective_rank: usize,
    /// sigma_max / sigma_min, or `f64::INFINITY` when sigma_min is negligible.
    pub kappa: f64,
    pub residual_norm: f64,
}

/// Relative truncation factor eps * max(N, K) used for rank decisions and the
/// infinite condition-number sentinel.
pub fn default_rank_tolerance(nrows: usize, ncols: usize) -> f64 {
    f64::EPSILON * nrows.max(ncols) as f64
}

/// QR + Jacobi SVD of a tall (or square) matrix.
struct Decomposition {
    qr: HouseholderQr,
    r: DMatrix<f64>,
    /// R V = W, columns of W orthogonal with norms `sigma`.
    w: DMatrix<f64>,
    v: DMatrix<f64>,
    sigma: Vec<f64>,
}

impl Decomposition {
    fn new(a: &DMatrix<f64>) -> Self {
        debug_assert!(a.nrows() >= a.ncols());
        let qr = HouseholderQr::new(a);
        let r = qr.r();
        let (w, v, sigma) = one_sided_jacobi(&r);
        Self { qr, r, w, v, sigma }
    }

    fn kappa(&self, nrows: usize, ncols: usize) -> f64 {
        kappa_from_sigma(&self.sigma, default_rank_tolerance(nrows, ncols))
    }
}

fn kappa_from_sigma(sigma: &[f64], rel_tol: f64) -> f64 {
    let max = sigma[0];
    let min = *sigma.last().unwrap();
    if min <= rel_tol * max {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_shape(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(LsmError::invalid(format!(
            "matrix must have at least one row and column, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(LsmError::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn check_rhs(a: &DMatrix<f64>, b: &[f64]) -> Result<()> {
    check_shape(a)?;
    if b.len() != a.nrows() {
        return Err(LsmError::invalid(format!(
            "right-hand side has length {} but matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(LsmError::invalid("right-hand side has non-finite entries"));
    }
    Ok(())
}

/// Descending singular values, min(N, K) of them.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_shape(a)?;
    let sigma = if a.nrows() >= a.ncols() {
        Decomposition::new(a).sigma
    } else {
        Decomposition::new(&a.transpose()).sigma
    };
    Ok(sigma)
}

/// 2-norm condition number sigma_max / sigma_min; `f64::INFINITY` when
/// sigma_min < eps * max(N, K) * sigma_max.
pub fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    let sigma = singular_values(a)?;
    if sigma[0] == 0.0 {
        return Err(LsmError::invalid("condition number of the zero matrix is undefined"));
    }
    Ok(kappa_from_sigma(&sigma, default_rank_tolerance(a.nrows(), a.ncols())))
}

/// (A^T A)(0) / N in closed form: entry (i, j) = f_i(x0) f_j(x0).
pub fn gram_at_zero(basis: &BasisSet, x0: f64) -> Result<DMatrix<f64>> {
    let f = basis.evaluate(x0)?;
    let energy: f64 = f.iter().map(|v| v * v).sum();
    if energy <= 0.0 {
        return Err(LsmError::Precondition(format!(
            "sum of squared basis values at x0 = {x0} is zero"
        )));
    }
    let k = f.len();
    Ok(DMatrix::from_fn(k, k, |i, j| f[i] * f[j]))
}

fn residual_norm(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    (0..a.nrows())
        .map(|i| {
            let fit: f64 = (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum();
            (fit - b[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn kappa_any_shape(a: &DMatrix<f64>) -> f64 {
    singular_values(a)
        .map(|s| {
            if s[0] == 0.0 {
                f64::INFINITY
            } else {
                kappa_from_sigma(&s, default_rank_tolerance(a.nrows(), a.ncols()))
            }
        })
        .unwrap_or(f64::INFINITY)
}

/// Solve (A^T A) x = A^T b by Cholesky.
pub fn solve_normal_equations(a: &DMatrix<f64>, b: &[f64]) -> Result<LsSolution> {
    check_rhs(a, b)?;
    let k = a.ncols();
    if a.nrows() < k {
        return Err(LsmError::SingularSystem { kappa: f64::INFINITY });
    }
    let kappa = kappa_any_shape(a);
    let gram = a.tr_mul(a);
    let rhs: Vec<f64> = (0..k)
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)] * b[i]).sum())
        .collect();
    let coefficients = cholesky::solve_spd(&gram, &rhs).ok_or(LsmError::SingularSystem { kappa })?;
    let residual_norm = residual_norm(a, &coefficients, b);
    Ok(LsSolution {
        coefficients,
        solver: Solver::NormalEquations,
        effective_rank: k,
        kappa,
        residual_norm,
    })
}

/// Householder QR least squares; fails on (numerical) rank deficiency.
pub fn solve_qr(a: &DMatrix<f64>, b: &[f64]) -> Result<LsSolution> {
    check_rhs(a, b)?;
    let (n, k) = a.shape();
    if n < k {
        return Err(LsmError::RankDeficient { kappa: kappa_any_shape(a) });
    }
    let dec = Decomposition::new(a);
    let kappa = dec.kappa(n, k);
    let diag = dec.qr.r_diagonal();
    let largest = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tol = default_rank_tolerance(n, k) * largest;
    if largest == 0.0 || diag.iter().any(|d| d.abs() <= tol) {
        return Err(LsmError::RankDeficient { kappa });
    }
    let mut qtb = b.to_vec();
    dec.qr.apply_qt(&mut qtb);
    let coefficients = back_substitute(&dec.r, &qtb[..k]);
    let residual_norm = residual_norm(a, &coefficients, b);
    Ok(LsSolution {
        coefficients,
        solver: Solver::HouseholderQr,
        effective_rank: k,
        kappa,
        residual_norm,
    })
}

/// Minimum-norm least squares via truncated SVD. Singular values at or below
/// `rank_tolerance * sigma_max` are dropped; the default tolerance is
/// [`default_rank_tolerance`]. Never fails on rank deficiency.
pub fn solve_svd(a: &DMatrix<f64>, b: &[f64], rank_tolerance: Option<f64>) -> Result<LsSolution> {
    check_rhs(a, b)?;
    let (n, k) = a.shape();
    let rel_tol = match rank_tolerance {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => return Err(LsmError::invalid(format!("rank tolerance must be >= 0, got {t}"))),
        None => default_rank_tolerance(n, k),
    };

    let mut coefficients = vec![0.0; k];
    let (sigma, effective_rank);
    if n >= k {
        let dec = Decomposition::new(a);
        let mut qtb = b.to_vec();
        dec.qr.apply_qt(&mut qtb);
        let y = &qtb[..k];
        let cutoff = rel_tol * dec.sigma[0];
        let mut rank = 0;
        for (j, &s) in dec.sigma.iter().enumerate() {
            if s == 0.0 || s <= cutoff {
                continue;
            }
            rank += 1;
            // u_j^T y / s_j = w_j . y / s_j^2
            let proj: f64 = (0..k).map(|i| dec.w[(i, j)] * y[i]).sum::<f64>() / (s * s);
            for (i, c) in coefficients.iter_mut().enumerate() {
                *c += proj * dec.v[(i, j)];
            }
        }
        sigma = dec.sigma;
        effective_rank = rank;
    } else {
        // A^T = Q R, R V = W  =>  A = V Sigma U^T Q^T with U = W Sigma^-1.
        let dec = Decomposition::new(&a.transpose());
        let cutoff = rel_tol * dec.sigma[0];
        let mut z = vec![0.0; k];
        let mut rank = 0;
        for (j, &s) in dec.sigma.iter().enumerate() {
            if s == 0.0 || s <= cutoff {
                continue;
            }
            rank += 1;
            let proj: f64 = (0..n).map(|i| dec.v[(i, j)] * b[i]).sum::<f64>() / (s * s);
            for i in 0..n {
                z[i] += proj * dec.w[(i, j)];
            }
        }
        dec.qr.apply_q(&mut z);
        coefficients = z;
        sigma = dec.sigma;
        effective_rank = rank;
    }

    let kappa = if sigma[0] == 0.0 {
        f64::INFINITY
    } else {
        kappa_from_sigma(&sigma, default_rank_tolerance(n, k))
    };
    let residual_norm = residual_norm(a, &coefficients, b);
    Ok(LsSolution {
        coefficients,
        solver: Solver::TruncatedSvd,
        effective_rank,
        kappa,
        residual_norm,
    })
}

/// Dispatch on the solver kind.
pub fn solve(solver: Solver, a: &DMatrix<f64>, b: &[f64], rank_tolerance: Option<f64>) -> Result<LsSolution> {
    match solver {
        Solver::NormalEquations => solve_normal_equations(a, b),
        Solver::HouseholderQr => solve_qr(a, b),
        Solver::TruncatedSvd => solve_svd(a, b, rank_tolerance),
    }
}
