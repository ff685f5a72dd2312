use rayon::prelude::*;

use super::rng::{Driver, GaussianStream};
use super::TimeGrid;
use crate::market_models::BlackScholesParams;

/// Terminal stock values of `n` paths of the exponential Black-Scholes
/// scheme `S_{k+1} = S_k exp((r - σ²/2)Δt + σ√Δt Z)`.
pub fn simulate_bs_paths(p: &BlackScholesParams, grid: &TimeGrid, n: usize, seed: u64) -> Vec<f64> {
    let dt = grid.dt();
    let drift = (p.r - 0.5 * p.sigma * p.sigma) * dt;
    let vol = p.sigma * dt.sqrt();
    (0..n)
        .into_par_iter()
        .map(|path| {
            let mut z = GaussianStream::new(seed, path, Driver::Stock);
            let mut s = p.s0;
            for _ in 0..grid.steps() {
                s *= (drift + vol * z.next_normal()).exp();
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_vol_is_deterministic() {
        // sigma = 0 bypasses validation on purpose: it is the deterministic limit.
        let p = BlackScholesParams {
            s0: 100.0,
            r: 0.01,
            sigma: 0.0,
        };
        let grid = TimeGrid::new(5.0, 50).unwrap();
        for s in simulate_bs_paths(&p, &grid, 20, 4) {
            assert_relative_eq!(s, 100.0 * (0.05f64).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn all_positive() {
        let p = BlackScholesParams {
            s0: 100.0,
            r: 0.01,
            sigma: 0.04,
        };
        let grid = TimeGrid::new(10.0, 100).unwrap();
        assert!(simulate_bs_paths(&p, &grid, 500, 1)
            .iter()
            .all(|s| *s > 0.0));
    }
}
