//! Polynomial regression bases and the per-date design matrix.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::paths::PathSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "monomial")]
    Monomial,
    #[serde(rename = "laguerre")]
    Laguerre,
    #[serde(rename = "legendre")]
    Legendre,
    #[serde(rename = "chebyshev")]
    ChebyshevFirstKind,
    /// Probabilists' Hermite polynomials He_n.
    #[serde(rename = "hermite")]
    HermiteProbabilists,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Monomial,
        Family::Laguerre,
        Family::Legendre,
        Family::ChebyshevFirstKind,
        Family::HermiteProbabilists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Monomial => "monomial",
            Family::Laguerre => "laguerre",
            Family::Legendre => "legendre",
            Family::ChebyshevFirstKind => "chebyshev",
            Family::HermiteProbabilists => "hermite",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LsmError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                LsmError::invalid(format!(
                    "unknown basis family {s:?} (expected monomial, laguerre, legendre, chebyshev or hermite)"
                ))
            })
    }
}

/// Affine map `x -> scale * x + shift` applied before evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    pub scale: f64,
    pub shift: f64,
}

impl Rescale {
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }
}

/// The first K members (degrees 0..K-1) of a polynomial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisSet {
    family: Family,
    k: usize,
    rescale: Option<Rescale>,
}

impl BasisSet {
    pub fn new(family: Family, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(LsmError::invalid("basis size K must be >= 1"));
        }
        Ok(Self { family, k, rescale: None })
    }

    pub fn with_rescale(mut self, rescale: Rescale) -> Result<Self> {
        if !(rescale.scale.is_finite() && rescale.scale != 0.0 && rescale.shift.is_finite()) {
            return Err(LsmError::invalid(format!(
                "rescale must have finite nonzero scale and finite shift, got {rescale:?}"
            )));
        }
        self.rescale = Some(rescale);
        Ok(self)
    }

    pub fn monomial(k: usize) -> Result<Self> {
        Self::new(Family::Monomial, k)
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn len(&self) -> usize {
        self.k
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn rescale(&self) -> Option<Rescale> {
        self.rescale
    }

    /// Writes (f_1(x), ..., f_K(x)) into `out[..K]`. `x` must be finite.
    pub fn evaluate_into(&self, x: f64, out: &mut [f64]) {
        let x = self.rescale.map_or(x, |r| r.apply(x));
        let k = self.k;
        out[0] = 1.0;
        if k == 1 {
            return;
        }
        out[1] = match self.family {
            Family::Monomial | Family::Legendre | Family::ChebyshevFirstKind | Family::HermiteProbabilists => x,
            Family::Laguerre => 1.0 - x,
        };
        for n in 1..k - 1 {
            let (p, q) = (out[n], out[n - 1]);
            let nf = n as f64;
            out[n + 1] = match self.family {
                Family::Monomial => x * p,
                Family::Laguerre => ((2.0 * nf + 1.0 - x) * p - nf * q) / (nf + 1.0),
                Family::Legendre => ((2.0 * nf + 1.0) * x * p - nf * q) / (nf + 1.0),
                Family::ChebyshevFirstKind => 2.0 * x * p - q,
                Family::HermiteProbabilists => x * p - nf * q,
            };
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<Vec<f64>> {
        if !x.is_finite() {
            return Err(LsmError::invalid(format!("basis argument must be finite, got {x}")));
        }
        let mut out = vec![0.0; self.k];
        self.evaluate_into(x, &mut out);
        Ok(out)
    }

    /// Value of `sum_k coefficients[k] * f_k(x)`.
    pub fn combine(&self, coefficients: &[f64], x: f64, scratch: &mut [f64]) -> f64 {
        self.evaluate_into(x, scratch);
        scratch[..self.k]
            .iter()
            .zip(coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }

    /// Row-wise evaluation of the basis at each state.
    pub fn matrix(&self, states: &[f64]) -> Result<DMatrix<f64>> {
        let mut a = DMatrix::zeros(states.len(), self.k);
        let mut row = vec![0.0; self.k];
        for (n, &x) in states.iter().enumerate() {
            if !x.is_finite() {
                return Err(LsmError::invalid(format!("state {n} is not finite: {x}")));
            }
            self.evaluate_into(x, &mut row);
            for (k, v) in row.iter().enumerate() {
                a[(n, k)] = *v;
            }
        }
        Ok(a)
    }
}

/// Free-function form of [`BasisSet::evaluate`].
pub fn evaluate_basis(basis: &BasisSet, x: f64) -> Result<Vec<f64>> {
    basis.evaluate(x)
}

/// A(t): entry (n, k) is f_k(X^n_t).
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
    t: f64,
}

impl DesignMatrix {
    pub fn new(entries: DMatrix<f64>, t: f64) -> Self {
        Self { entries, t }
    }
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }
}

pub fn design_matrix(basis: &BasisSet, paths: &PathSet, date_index: usize) -> Result<DesignMatrix> {
    let steps = paths.grid().steps();
    if date_index > steps {
        return Err(LsmError::invalid(format!(
            "date index {date_index} out of range 0..={steps}"
        )));
    }
    let entries = basis.matrix(&paths.column(date_index))?;
    Ok(DesignMatrix::new(entries, paths.grid().t(date_index)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::TimeGrid;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn hand_evaluated_members() {
        let v = BasisSet::monomial(3).unwrap().evaluate(2.0).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 4.0]);
        let v = BasisSet::new(Family::ChebyshevFirstKind, 4).unwrap().evaluate(0.5).unwrap();
        assert!(close(&v, &[1.0, 0.5, -0.5, -1.0], 1e-15), "{v:?}");
        let v = BasisSet::new(Family::Laguerre, 3).unwrap().evaluate(1.0).unwrap();
        assert!(close(&v, &[1.0, 0.0, -0.5], 1e-15), "{v:?}");
        for fam in Family::ALL {
            assert_eq!(BasisSet::new(fam, 1).unwrap().evaluate(3.7).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn closed_forms_on_grid() {
        let legendre = BasisSet::new(Family::Legendre, 3).unwrap();
        let hermite = BasisSet::new(Family::HermiteProbabilists, 3).unwrap();
        for i in 0..100 {
            let x = -2.0 + 4.0 * i as f64 / 99.0;
            let p2 = (3.0 * x * x - 1.0) / 2.0;
            let he2 = x * x - 1.0;
            let got_p = legendre.evaluate(x).unwrap()[2];
            let got_h = hermite.evaluate(x).unwrap()[2];
            assert!((got_p - p2).abs() <= 1e-12 * p2.abs().max(f64::MIN_POSITIVE), "P2({x})");
            assert!((got_h - he2).abs() <= 1e-12 * he2.abs().max(f64::MIN_POSITIVE), "He2({x})");
        }
    }

    #[test]
    fn higher_members_match_closed_forms() {
        let x = 0.7f64;
        let l = BasisSet::new(Family::Legendre, 4).unwrap().evaluate(x).unwrap();
        assert!((l[3] - (5.0 * x.powi(3) - 3.0 * x) / 2.0).abs() < 1e-14);
        let h = BasisSet::new(Family::HermiteProbabilists, 4).unwrap().evaluate(x).unwrap();
        assert!((h[3] - (x.powi(3) - 3.0 * x)).abs() < 1e-14);
        let g = BasisSet::new(Family::Laguerre, 4).unwrap().evaluate(x).unwrap();
        let l3 = (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
        assert!((g[3] - l3).abs() < 1e-14);
        let c = BasisSet::new(Family::ChebyshevFirstKind, 4).unwrap().evaluate(x).unwrap();
        assert!((c[3] - (3.0 * x.acos()).cos()).abs() < 1e-14);
    }

    #[test]
    fn rescale_applies_before_evaluation() {
        let b = BasisSet::monomial(3)
            .unwrap()
            .with_rescale(Rescale { scale: 2.0, shift: -1.0 })
            .unwrap();
        assert_eq!(b.evaluate(1.5).unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(BasisSet::monomial(2).unwrap().with_rescale(Rescale { scale: 0.0, shift: 0.0 }).is_err());
    }

    #[test]
    fn errors() {
        assert!(BasisSet::monomial(0).is_err());
        assert!(matches!(
            BasisSet::monomial(2).unwrap().evaluate(f64::NAN),
            Err(LsmError::InvalidArgument(_))
        ));
        assert!("cheb".parse::<Family>().is_err());
        for fam in Family::ALL {
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
        }
    }

    #[test]
    fn design_matrix_cases() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let ps = PathSet::from_rows(grid, vec![vec![1.0, 1.0, 3.0], vec![1.0, 2.0, 0.5]], 0).unwrap();
        let a = design_matrix(&BasisSet::monomial(2).unwrap(), &ps, 1).unwrap();
        assert_eq!(a.entries(), &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        assert_eq!(a.t(), 0.5);

        let a0 = design_matrix(&BasisSet::monomial(3).unwrap(), &ps, 0).unwrap();
        assert_eq!(a0.entries().row(0), a0.entries().row(1));
        let a2 = design_matrix(&BasisSet::monomial(3).unwrap(), &ps, 2).unwrap();
        assert!(a2.entries().column(0).iter().all(|&v| v == 1.0));

        assert!(matches!(
            design_matrix(&BasisSet::monomial(2).unwrap(), &ps, 3),
            Err(LsmError::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn prefix_property(fam_idx in 0usize..5, k in 1usize..9, x in -3.0f64..3.0) {
            let fam = Family::ALL[fam_idx];
            let short = BasisSet::new(fam, k).unwrap().evaluate(x).unwrap();
            let long = BasisSet::new(fam, k + 1).unwrap().evaluate(x).unwrap();
            prop_assert_eq!(&long[..k], &short[..]);
        }
    }
}
