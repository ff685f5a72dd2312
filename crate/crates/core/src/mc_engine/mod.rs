//! Seeded Euler schemes for the Black-Scholes and Vasicek-Heston markets,
//! pathwise discounting, and Monte Carlo estimation.

mod bs;
mod rng;
mod vh;

pub use bs::simulate_bs_paths;
pub use rng::{gaussian_stream, Driver, GaussianStream};
pub use vh::{cumulative_discount, PathBuffer, PathSet, RateDrift, VhSimulator};

use crate::error::{Error, Result};

/// Uniform grid `t_k = kT/N`, `k = 0..=N`, with `t_N = T` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("time grid needs at least one step"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param(format!(
                "time grid horizon must be > 0, got {horizon}"
            )));
        }
        let n = steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|k| k as f64 * horizon / n).collect();
        nodes[steps] = horizon;
        Ok(Self {
            horizon,
            steps,
            dt: horizon / n,
            nodes,
        })
    }

    /// `N = ⌈steps_per_year · T⌉`.
    pub fn with_steps_per_year(horizon: f64, steps_per_year: usize) -> Result<Self> {
        let exact = steps_per_year as f64 * horizon;
        // Guard against 252 * 0.1 landing a hair above an integer.
        let steps = (exact - 1e-9 * exact.max(1.0)).ceil().max(1.0) as usize;
        Self::new(horizon, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoidal weights over the nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.dt; self.steps + 1];
        w[0] *= 0.5;
        w[self.steps] *= 0.5;
        w
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: Option<u64>,
}

impl PriceEstimate {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Multiply by a deterministic factor; the standard error scales with it.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            stderr: self.stderr * factor.abs(),
            ..self
        }
    }
}

/// Sample mean and `s/√n` with the unbiased sample deviation `s`.
pub fn mc_estimate(samples: &[f64]) -> Result<PriceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = (ss / (nf - 1.0)).sqrt();
    Ok(PriceEstimate {
        mean,
        stderr: std / nf.sqrt(),
        n_paths: n,
        seed: None,
    })
}
