//! Full-truncation Euler scheme for the Vasicek rate, the forward variance
//! `ξ_{t_k}(t_N)`, the implied instantaneous variance, the stock and the
//! zero-coupon bond maturing at the end of the grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{Driver, GaussianStream};
use super::TimeGrid;
use crate::error::{Error, Result};
use crate::market_models::{HestonParams, VasicekParams};

/// Which drift correction enters the rate recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateDrift {
    /// Add `σγ⁰(t_k)` with `γ⁰` from the bond martingale condition.
    #[default]
    Corollary,
    /// Plain Vasicek dynamics, `γ⁰ ≡ 0`.
    Zero,
}

/// State of one simulated path on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBuffer {
    pub r: Vec<f64>,
    pub nu: Vec<f64>,
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    /// `D_{0,t_k}` from the left-endpoint rule.
    pub discount: Vec<f64>,
}

impl PathBuffer {
    pub fn new(steps: usize) -> Self {
        let z = vec![0.0; steps + 1];
        Self {
            r: z.clone(),
            nu: z.clone(),
            xi: z.clone(),
            s: z.clone(),
            p: z.clone(),
            discount: z,
        }
    }
}

/// `D_{0,t_k} = exp(-Σ_{j<k} r_j Δt)` written into `out`.
pub fn cumulative_discount(r: &[f64], dt: f64, out: &mut [f64]) {
    let mut acc = 0.0;
    out[0] = 1.0;
    for k in 1..out.len() {
        acc += r[k - 1] * dt;
        out[k] = (-acc).exp();
    }
}

/// Precomputed per-node coefficients of the Vasicek-Heston scheme.
#[derive(Debug, Clone)]
pub struct VhSimulator {
    vp: VasicekParams,
    hp: HestonParams,
    grid: TimeGrid,
    rate_drift: RateDrift,
    /// `e^{-κ(T - t_k)}`
    decay: Vec<f64>,
    /// `e^{κ(T - t_k)}`
    growth: Vec<f64>,
    /// `B(t_k, T)`
    bond_b: Vec<f64>,
    // σγ⁰(t_k, r) = gamma_slope[k] * r + gamma_level[k]
    gamma_slope: Vec<f64>,
    gamma_level: Vec<f64>,
    xi0: f64,
    p0: f64,
}

impl VhSimulator {
    pub fn new(
        vp: VasicekParams,
        hp: HestonParams,
        grid: TimeGrid,
        rate_drift: RateDrift,
    ) -> Result<Self> {
        vp.validate()?;
        hp.validate()?;
        let horizon = grid.horizon();
        let tau: Vec<f64> = grid.nodes().iter().map(|t| horizon - t).collect();
        let decay = tau.iter().map(|x| (-hp.kappa * x).exp()).collect();
        let growth = tau.iter().map(|x| (hp.kappa * x).exp()).collect();
        let bond_b: Vec<f64> = tau.iter().map(|x| vp.b_unchecked(*x)).collect();

        let steps = grid.steps();
        let mut gamma_slope = vec![0.0; steps];
        let mut gamma_level = vec![0.0; steps];
        if rate_drift == RateDrift::Corollary && vp.sigma > 0.0 {
            for k in 0..steps {
                let b = bond_b[k];
                gamma_slope[k] = (b * vp.k - 1.0) / b;
                gamma_level[k] = 0.5 * b * vp.sigma * vp.sigma - vp.k * vp.theta;
            }
        }

        let xi0 = hp.forward_variance(0.0, horizon, hp.nu0)?;
        let p0 = vp.zcb_price(0.0, horizon, vp.r0)?;
        Ok(Self {
            vp,
            hp,
            grid,
            rate_drift,
            decay,
            growth,
            bond_b,
            gamma_slope,
            gamma_level,
            xi0,
            p0,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn rate_drift(&self) -> RateDrift {
        self.rate_drift
    }

    /// The `σγ⁰` term used at node `k` for rate `r`.
    pub fn rate_drift_term(&self, k: usize, r: f64) -> f64 {
        self.gamma_slope[k] * r + self.gamma_level[k]
    }

    /// Simulate path `path` into `out`.
    pub fn simulate_path(&self, seed: u64, path: usize, out: &mut PathBuffer) -> Result<()> {
        let vp = &self.vp;
        let hp = &self.hp;
        let dt = self.grid.dt();
        let sqrt_dt = dt.sqrt();
        let steps = self.grid.steps();

        let mut w0 = GaussianStream::new(seed, path, Driver::Rate);
        let mut w1 = GaussianStream::new(seed, path, Driver::Stock);
        let mut w2 = GaussianStream::new(seed, path, Driver::Variance);

        out.r[0] = vp.r0;
        out.nu[0] = hp.nu0;
        out.xi[0] = self.xi0;
        out.s[0] = hp.s0;
        out.p[0] = self.p0;
        out.discount[0] = 1.0;

        let mut log_discount = 0.0;
        for k in 0..steps {
            let z0 = w0.next_normal();
            let z1 = w1.next_normal();
            let z2 = w2.next_normal();

            let r = out.r[k];
            let xi = out.xi[k];
            let s = out.s[k];
            let p = out.p[k];
            let root_nu_dt = (out.nu[k].max(0.0) * dt).sqrt();

            let r_next = r
                + (vp.k * (vp.theta - r.max(0.0)) + self.rate_drift_term(k, r)) * dt
                + vp.sigma * sqrt_dt * z0;
            let xi_next = xi + r * xi * dt + hp.eta * self.decay[k] * root_nu_dt * z2;
            let nu_next = hp.nu_bar + self.growth[k + 1] * (xi_next - hp.nu_bar);
            let s_next = s + r * s * dt + s * root_nu_dt * z1;
            let p_next = p + p * (r * dt - vp.sigma * self.bond_b[k] * sqrt_dt * z0);

            for (value, quantity) in [
                (r_next, "short rate"),
                (xi_next, "forward variance"),
                (nu_next, "variance"),
                (s_next, "stock price"),
                (p_next, "bond price"),
            ] {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        path,
                        step: k + 1,
                        quantity,
                    });
                }
            }

            out.r[k + 1] = r_next;
            out.xi[k + 1] = xi_next;
            out.nu[k + 1] = nu_next;
            out.s[k + 1] = s_next;
            out.p[k + 1] = p_next;
            log_discount += r * dt;
            out.discount[k + 1] = (-log_discount).exp();
        }
        Ok(())
    }

    /// Simulate paths `0..n` and reduce each one with `f`, in path order.
    /// Results do not depend on the number of rayon workers.
    pub fn map_paths<T, F>(&self, n: usize, seed: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &PathBuffer) -> T + Sync + Send,
    {
        let steps = self.grid.steps();
        let results: Vec<Result<T>> = (0..n)
            .into_par_iter()
            .map_init(
                || PathBuffer::new(steps),
                |buf, i| {
                    self.simulate_path(seed, i, buf)?;
                    Ok(f(i, buf))
                },
            )
            .collect();
        results.into_iter().collect()
    }

    /// Simulate and keep every node of every path.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<PathSet> {
        if n == 0 {
            return Err(Error::param("need at least one path"));
        }
        let width = self.grid.steps() + 1;
        let per_path = self.map_paths(n, seed, |_, b| b.clone())?;
        let mut set = PathSet {
            n_paths: n,
            grid: self.grid.clone(),
            seed,
            r: Vec::with_capacity(n * width),
            nu: Vec::with_capacity(n * width),
            xi: Vec::with_capacity(n * width),
            s: Vec::with_capacity(n * width),
            p: Vec::with_capacity(n * width),
        };
        for b in per_path {
            set.r.extend_from_slice(&b.r);
            set.nu.extend_from_slice(&b.nu);
            set.xi.extend_from_slice(&b.xi);
            set.s.extend_from_slice(&b.s);
            set.p.extend_from_slice(&b.p);
        }
        Ok(set)
    }
}

/// Joint trajectories of `(r, ν, ξ, S, P)` stored path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    n_paths: usize,
    grid: TimeGrid,
    seed: u64,
    r: Vec<f64>,
    nu: Vec<f64>,
    xi: Vec<f64>,
    s: Vec<f64>,
    p: Vec<f64>,
}

impl PathSet {
    /// Build a path set from explicit rate paths, with the remaining
    /// quantities held at the given constants. Used to drive the
    /// quadrature routines with known discount curves.
    pub fn from_rates(grid: TimeGrid, rates: Vec<Vec<f64>>, s0: f64) -> Result<Self> {
        let width = grid.steps() + 1;
        if rates.is_empty() || rates.iter().any(|r| r.len() != width) {
            return Err(Error::param(format!("every rate path needs {width} nodes")));
        }
        let n = rates.len();
        Ok(Self {
            n_paths: n,
            grid,
            seed: 0,
            r: rates.concat(),
            nu: vec![0.0; n * width],
            xi: vec![0.0; n * width],
            s: vec![s0; n * width],
            p: vec![1.0; n * width],
        })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn row(&self, v: &'_ [f64], path: usize) -> std::ops::Range<usize> {
        let width = self.grid.steps() + 1;
        debug_assert_eq!(v.len(), self.n_paths * width);
        path * width..(path + 1) * width
    }

    pub fn r(&self, path: usize) -> &[f64] {
        &self.r[self.row(&self.r, path)]
    }

    pub fn nu(&self, path: usize) -> &[f64] {
        &self.nu[self.row(&self.nu, path)]
    }

    pub fn xi(&self, path: usize) -> &[f64] {
        &self.xi[self.row(&self.xi, path)]
    }

    pub fn s(&self, path: usize) -> &[f64] {
        &self.s[self.row(&self.s, path)]
    }

    pub fn p(&self, path: usize) -> &[f64] {
        &self.p[self.row(&self.p, path)]
    }

    /// Discount factors of one path on every node.
    pub fn discounts(&self, path: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.steps() + 1];
        cumulative_discount(self.r(path), self.grid.dt(), &mut out);
        out
    }

    /// `D_{0,t_k}` for every path.
    pub fn pathwise_discount(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.grid.steps() {
            return Err(Error::domain(format!(
                "node {k} is past the last node {}",
                self.grid.steps()
            )));
        }
        let dt = self.grid.dt();
        Ok((0..self.n_paths)
            .map(|i| (-self.r(i)[..k].iter().map(|r| r * dt).sum::<f64>()).exp())
            .collect())
    }

    /// Share of stored stock values that are not positive.
    pub fn negative_stock_fraction(&self) -> f64 {
        self.s.iter().filter(|s| **s <= 0.0).count() as f64 / self.s.len() as f64
    }

    /// One row per (path, node): `path,k,t,r,nu,xi,s,p`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "k", "t", "r", "nu", "xi", "s", "p"])?;
        for i in 0..self.n_paths {
            let (r, nu, xi, s, p) = (self.r(i), self.nu(i), self.xi(i), self.s(i), self.p(i));
            for (k, t) in self.grid.nodes().iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    k.to_string(),
                    t.to_string(),
                    r[k].to_string(),
                    nu[k].to_string(),
                    xi[k].to_string(),
                    s[k].to_string(),
                    p[k].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "path dump".into(),
            source: e,
        })?;
        Ok(())
    }
}
