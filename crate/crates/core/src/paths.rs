//! Monte Carlo paths of a scalar diffusion on a uniform time grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::rng::NormalSubstream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// dX = mu X dt + sigma X dW
    Lognormal,
    /// dX = mu dt + sigma dW
    Arithmetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Milstein,
}

/// Constant-coefficient scalar diffusion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdeModel {
    kind: ModelKind,
    mu: f64,
    sigma: f64,
    x0: f64,
}

impl SdeModel {
    pub fn new(kind: ModelKind, mu: f64, sigma: f64, x0: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(LsmError::invalid(format!("mu must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(LsmError::invalid(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(LsmError::invalid(format!("x0 must be > 0, got {x0}")));
        }
        Ok(Self { kind, mu, sigma, x0 })
    }

    pub fn lognormal(mu: f64, sigma: f64, x0: f64) -> Result<Self> {
        Self::new(ModelKind::Lognormal, mu, sigma, x0)
    }

    pub fn arithmetic(mu: f64, sigma: f64, x0: f64) -> Result<Self> {
        Self::new(ModelKind::Arithmetic, mu, sigma, x0)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Advance one step of length `dt` given the Brownian increment `dw`.
    pub fn step(&self, scheme: Scheme, x: f64, dt: f64, dw: f64) -> f64 {
        let (mu, sigma) = (self.mu, self.sigma);
        match (self.kind, scheme) {
            (ModelKind::Lognormal, Scheme::Euler) => x * (1.0 + mu * dt + sigma * dw),
            (ModelKind::Lognormal, Scheme::Milstein) => {
                x * (1.0 + mu * dt + sigma * dw + 0.5 * sigma * sigma * (dw * dw - dt))
            }
            // diffusion coefficient is constant, so the Milstein correction vanishes
            (ModelKind::Arithmetic, _) => x + mu * dt + sigma * dw,
        }
    }
}

/// Uniform grid t_m = T m / M, m = 0..=M.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(LsmError::invalid(format!("T must be > 0, got {horizon}")));
        }
        if steps < 2 {
            return Err(LsmError::invalid(format!("M must be >= 2, got {steps}")));
        }
        let nodes = (0..=steps)
            .map(|m| horizon * m as f64 / steps as f64)
            .collect();
        Ok(Self { horizon, steps, nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    /// Number of subintervals M.
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn t(&self, m: usize) -> f64 {
        self.nodes[m]
    }
}

/// Shorthand for [`TimeGrid::new`].
pub fn build_time_grid(horizon: f64, steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, steps)
}

/// N x (M+1) simulated values, stored row-major (one row per path).
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    grid: TimeGrid,
    n_paths: usize,
    values: Vec<f64>,
    seed: u64,
}

impl PathSet {
    /// Wrap externally supplied path values. Column 0 must be constant and positive.
    pub fn from_rows(grid: TimeGrid, rows: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if rows.is_empty() {
            return Err(LsmError::invalid("path set needs at least one path"));
        }
        let width = grid.steps() + 1;
        let x0 = rows[0][0];
        let mut values = Vec::with_capacity(rows.len() * width);
        for (n, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(LsmError::invalid(format!(
                    "path {n} has {} values, expected {width}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(LsmError::invalid(format!("path {n} has non-finite value {bad}")));
            }
            if row[0] != x0 {
                return Err(LsmError::invalid(format!(
                    "path {n} starts at {} but path 0 starts at {x0}; column 0 must be constant",
                    row[0]
                )));
            }
            values.extend_from_slice(row);
        }
        if x0 <= 0.0 {
            return Err(LsmError::invalid(format!("initial value must be > 0, got {x0}")));
        }
        Ok(Self { grid, n_paths: rows.len(), values, seed })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn x0(&self) -> f64 {
        self.values[0]
    }
    pub fn value(&self, n: usize, m: usize) -> f64 {
        self.values[n * (self.grid.steps + 1) + m]
    }
    pub fn path(&self, n: usize) -> &[f64] {
        let w = self.grid.steps + 1;
        &self.values[n * w..(n + 1) * w]
    }
    pub fn paths(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.grid.steps + 1)
    }
    /// All path values at date index `m`.
    pub fn column(&self, m: usize) -> Vec<f64> {
        self.paths().map(|p| p[m]).collect()
    }
}

/// Simulate `n_paths` paths. Output depends only on the arguments, never on
/// the rayon thread count.
pub fn simulate(
    model: &SdeModel,
    grid: &TimeGrid,
    n_paths: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<PathSet> {
    if n_paths == 0 {
        return Err(LsmError::invalid("number of paths N must be >= 1"));
    }
    let width = grid.steps() + 1;
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let mut values = vec![0.0; n_paths * width];
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(n, row)| {
            let mut normals = NormalSubstream::new(seed, n as u64);
            row[0] = model.x0();
            for m in 1..width {
                let dw = sqrt_dt * normals.next_standard_normal();
                row[m] = model.step(scheme, row[m - 1], dt, dw);
            }
        });
    Ok(PathSet { grid: grid.clone(), n_paths, values, seed })
}
