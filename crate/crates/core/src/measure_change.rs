//! Risk-neutral drift corrections for the Vasicek-Heston market.
//!
//! Each correction makes one discounted traded asset a martingale: `γ¹`
//! the stock, `γ²` the variance swap quoting `ξ_{t,T}`, and `γ⁰` the
//! zero-coupon bond maturing at `T`.

use crate::error::{Error, Result};
use crate::market_models::{HestonParams, VasicekParams};

/// Market prices of risk for the rate, stock and variance drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTriple {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl GammaTriple {
    /// Evaluate all three corrections at one admissible state.
    #[allow(clippy::too_many_arguments)]
    pub fn at(
        t: f64,
        maturity: f64,
        r: f64,
        xi: f64,
        nu: f64,
        vp: &VasicekParams,
        hp: &HestonParams,
    ) -> Result<Self> {
        Ok(Self {
            gamma0: gamma0(t, maturity, r, vp)?,
            gamma1: gamma1(r, hp.mu, nu)?,
            gamma2: gamma2(t, maturity, r, xi, nu, hp)?,
        })
    }
}

/// `γ¹ = (r - μ)/√ν`.
pub fn gamma1(r: f64, mu: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::domain(format!("gamma1 needs nu > 0, got {nu}")));
    }
    Ok((r - mu) / nu.sqrt())
}

/// `γ² = ξ r / (η e^{-κ(T-t)} √ν)`.
pub fn gamma2(t: f64, maturity: f64, r: f64, xi: f64, nu: f64, hp: &HestonParams) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::domain(format!("gamma2 needs nu > 0, got {nu}")));
    }
    if hp.eta == 0.0 {
        return Err(Error::domain("gamma2 is undefined for eta = 0"));
    }
    if t > maturity {
        return Err(Error::domain(format!(
            "require t <= T, got t={t}, T={maturity}"
        )));
    }
    Ok(xi * r / (hp.eta * (-hp.kappa * (maturity - t)).exp() * nu.sqrt()))
}

fn bond_b_open(t: f64, maturity: f64, vp: &VasicekParams) -> Result<f64> {
    if !(t < maturity) {
        return Err(Error::domain(format!(
            "gamma0 needs t < T (B(t,T) > 0), got t={t}, T={maturity}"
        )));
    }
    Ok(vp.b_unchecked(maturity - t))
}

/// `γ⁰` in the simplified form `[2(Bk-1)r + B(Bσ² - 2kθ)] / (2Bσ)`,
/// which does not depend on `ν` or `η`.
pub fn gamma0(t: f64, maturity: f64, r: f64, vp: &VasicekParams) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    if !(vp.sigma > 0.0) {
        return Err(Error::domain("gamma0 is undefined for sigma = 0"));
    }
    Ok(gamma0_numerator(b, r, vp) / (2.0 * b * vp.sigma))
}

fn gamma0_numerator(b: f64, r: f64, vp: &VasicekParams) -> f64 {
    2.0 * (b * vp.k - 1.0) * r + b * (b * vp.sigma * vp.sigma - 2.0 * vp.k * vp.theta)
}

/// `γ⁰` in its unsimplified form, with `Θ = 2Bση√ν` in the
/// denominator. Produces 0/0 when `ν = 0` or `η = 0`.
pub fn gamma0_corollary(
    t: f64,
    maturity: f64,
    r: f64,
    nu: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    let root = nu.sqrt();
    let theta = 2.0 * b * vp.sigma * hp.eta * root;
    Ok(hp.eta * root * gamma0_numerator(b, r, vp) / theta)
}

/// `γ¹` in unsimplified form `-2Bση(μ - r)/Θ`.
pub fn gamma1_corollary(
    t: f64,
    maturity: f64,
    r: f64,
    nu: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    let theta = 2.0 * b * vp.sigma * hp.eta * nu.sqrt();
    Ok(-2.0 * b * vp.sigma * hp.eta * (hp.mu - r) / theta)
}

/// `γ²` in unsimplified form `2B e^{κ(T-t)} r σ ξ / Θ`.
#[allow(clippy::too_many_arguments)]
pub fn gamma2_corollary(
    t: f64,
    maturity: f64,
    r: f64,
    xi: f64,
    nu: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    let theta = 2.0 * b * vp.sigma * hp.eta * nu.sqrt();
    Ok(2.0 * b * (hp.kappa * (maturity - t)).exp() * r * vp.sigma * xi / theta)
}

/// The product `σγ⁰` that enters the simulated rate drift. Finite for
/// `σ = 0`, where the rate carries no Brownian risk and the correction is
/// taken to be zero.
pub fn rate_drift_correction(t: f64, maturity: f64, r: f64, vp: &VasicekParams) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    if vp.sigma == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma0_numerator(b, r, vp) / (2.0 * b))
}

/// Left side of the bond martingale condition,
/// `-(σBγ⁰ + Bkθ - B²σ²/2) / (1 - Bk)`. Equals `r` when `γ⁰` is the
/// risk-neutral correction.
pub fn bond_condition_lhs(t: f64, maturity: f64, gamma0: f64, vp: &VasicekParams) -> Result<f64> {
    let b = bond_b_open(t, maturity, vp)?;
    let s = vp.sigma;
    Ok(-(s * b * gamma0 + b * vp.k * vp.theta - 0.5 * b * b * s * s) / (1.0 - b * vp.k))
}

/// Drift of the discounted stock after the measure change: `μ - r + √ν γ¹`.
pub fn stock_drift_residual(r: f64, mu: f64, nu: f64, gamma1: f64) -> f64 {
    mu - r + nu.sqrt() * gamma1
}

/// Drift of the discounted variance swap after the measure change:
/// `η e^{-κ(T-t)} √ν γ² - r ξ`.
pub fn forward_variance_drift_residual(
    t: f64,
    maturity: f64,
    r: f64,
    xi: f64,
    nu: f64,
    gamma2: f64,
    hp: &HestonParams,
) -> f64 {
    hp.eta * (-hp.kappa * (maturity - t)).exp() * nu.sqrt() * gamma2 - r * xi
}
