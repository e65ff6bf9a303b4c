#![allow(dead_code)]

use lsm_core::{BasisSet, LsmError, Solver};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Columns (1, x, x^2) at N points packed into [1, 1 + delta], with a target
/// that is smooth in the normalized coordinate (x - 1) / delta.
pub fn clustered_quadratic(delta: f64, n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let basis = BasisSet::monomial(3).unwrap();
    let u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let x: Vec<f64> = u.iter().map(|v| 1.0 + delta * v).collect();
    let a = basis.matrix(&x).unwrap();
    let b = u.iter().map(|v| v.exp()).collect();
    (a, b)
}

pub fn rel_err(x: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = reference.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}

pub struct GradeOutcome {
    pub delta: f64,
    pub kappa: f64,
    pub qr_err: f64,
    /// None when the normal equations raised a singular-system error.
    pub normal_err: Option<f64>,
    pub svd_ok: bool,
}

pub const GRADES: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

pub fn run_grade(delta: f64) -> GradeOutcome {
    let (a, b) = clustered_quadratic(delta, 200);
    let svd = lsm_core::solve_svd(&a, &b, None);
    let svd_ok = svd.as_ref().is_ok_and(|s| s.coefficients.iter().all(|c| c.is_finite()));
    let reference = svd.unwrap().coefficients;
    let qr = lsm_core::regress::solve(Solver::HouseholderQr, &a, &b, None).unwrap();
    let normal_err = match lsm_core::solve_normal_equations(&a, &b) {
        Ok(s) => Some(rel_err(&s.coefficients, &reference)),
        Err(LsmError::SingularSystem { .. }) => None,
        Err(e) => panic!("unexpected error {e}"),
    };
    GradeOutcome {
        delta,
        kappa: qr.kappa,
        qr_err: rel_err(&qr.coefficients, &reference),
        normal_err,
        svd_ok,
    }
}

/// Random N x K matrices with entries in [-1, 1], kept when kappa <= kappa_max.
pub fn random_well_conditioned(seed: u64, count: usize, n: usize, k: usize, kappa_max: f64) -> Vec<(DMatrix<f64>, Vec<f64>)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if lsm_core::condition_number(&a).unwrap() <= kappa_max {
            out.push((a, b));
        }
    }
    out
}
