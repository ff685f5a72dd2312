//! Closed-form analytics: Vasicek bond prices and moments, the Heston
//! forward-variance map, and the Black-Scholes call/endowment baseline.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Vasicek short rate `dr = k(θ - r)dt + σ dW⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VasicekParams {
    /// Mean-reversion speed.
    pub k: f64,
    /// Long-run rate level.
    pub theta: f64,
    /// Rate volatility. Zero is accepted and gives a deterministic rate.
    pub sigma: f64,
    pub r0: f64,
}

impl VasicekParams {
    pub fn new(k: f64, theta: f64, sigma: f64, r0: f64) -> Result<Self> {
        let p = Self {
            k,
            theta,
            sigma,
            r0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param(format!(
                "vasicek k must be > 0, got {}",
                self.k
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!(
                "vasicek sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !self.theta.is_finite() || !self.r0.is_finite() {
            return Err(Error::param("vasicek theta and r0 must be finite"));
        }
        Ok(())
    }

    /// `B(t,T) = (1 - e^{-k(T-t)}) / k`.
    pub fn b(&self, t: f64, maturity: f64) -> Result<f64> {
        check_order(t, maturity)?;
        Ok(self.b_unchecked(maturity - t))
    }

    pub(crate) fn b_unchecked(&self, tau: f64) -> f64 {
        -(-self.k * tau).exp_m1() / self.k
    }

    /// `A(t,T) = exp((θ - σ²/2k²)(B + t - T) - σ²B²/4k)`.
    pub fn a(&self, t: f64, maturity: f64) -> Result<f64> {
        check_order(t, maturity)?;
        let tau = maturity - t;
        let b = self.b_unchecked(tau);
        let s2 = self.sigma * self.sigma;
        let k = self.k;
        Ok(((self.theta - s2 / (2.0 * k * k)) * (b - tau) - s2 / (4.0 * k) * b * b).exp())
    }

    /// Zero-coupon bond price `P(t,T) = A(t,T) e^{-B(t,T) r_t}`.
    pub fn zcb_price(&self, t: f64, maturity: f64, r_t: f64) -> Result<f64> {
        let a = self.a(t, maturity)?;
        let b = self.b(t, maturity)?;
        Ok(a * (-b * r_t).exp())
    }

    /// Mean and variance of `r_T` given `r_t`.
    pub fn conditional_moments(&self, t: f64, maturity: f64, r_t: f64) -> Result<(f64, f64)> {
        check_order(t, maturity)?;
        let tau = maturity - t;
        let decay = (-self.k * tau).exp();
        let mean = decay * r_t + self.theta * (1.0 - decay);
        let var = self.sigma * self.sigma / (2.0 * self.k) * -(-2.0 * self.k * tau).exp_m1();
        Ok((mean, var))
    }
}

/// Heston stock/variance parameters. `mu` is the real-world drift and only
/// enters through the market price of risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HestonParams {
    pub kappa: f64,
    pub nu_bar: f64,
    /// Vol-of-vol.
    pub eta: f64,
    pub nu0: f64,
    pub mu: f64,
    pub s0: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.kappa > 0.0, "kappa must be > 0"),
            (self.nu_bar >= 0.0, "nu_bar must be >= 0"),
            (self.eta >= 0.0, "eta must be >= 0"),
            (self.nu0 >= 0.0, "nu0 must be >= 0"),
            (self.s0 > 0.0, "s0 must be > 0"),
            (self.mu.is_finite(), "mu must be finite"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::param(format!("heston {msg}")));
            }
        }
        if [self.kappa, self.nu_bar, self.eta, self.nu0, self.s0]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::param("heston parameters must be finite"));
        }
        Ok(())
    }

    /// Forward variance `ξ_{t,u} = ν̄ + e^{-κ(u-t)}(ν_t - ν̄)`.
    pub fn forward_variance(&self, t: f64, u: f64, nu_t: f64) -> Result<f64> {
        check_order(t, u)?;
        Ok(self.nu_bar + (-self.kappa * (u - t)).exp() * (nu_t - self.nu_bar))
    }

    /// Inverse of [`forward_variance`](Self::forward_variance):
    /// `ν_t = ν̄ + e^{κ(u-t)}(ξ_{t,u} - ν̄)`.
    pub fn nu_from_forward_variance(&self, t: f64, u: f64, xi: f64) -> Result<f64> {
        check_order(t, u)?;
        Ok(self.nu_bar + (self.kappa * (u - t)).exp() * (xi - self.nu_bar))
    }

    /// Diffusion coefficient of `ξ_{·,u}` written as a function of the quote:
    /// `e^{-κ(u-t)} η √ψ(t,u,ξ)`.
    pub fn lambda(&self, t: f64, u: f64, xi: f64) -> Result<f64> {
        let nu = self.nu_from_forward_variance(t, u, xi)?;
        if nu < 0.0 {
            return Err(Error::domain(format!(
                "implied instantaneous variance {nu} is negative"
            )));
        }
        Ok((-self.kappa * (u - t)).exp() * self.eta * nu.sqrt())
    }
}

/// Constant-coefficient Black-Scholes market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlackScholesParams {
    pub s0: f64,
    pub r: f64,
    pub sigma: f64,
}

impl BlackScholesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::param("black-scholes s0 must be > 0"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("black-scholes sigma must be > 0"));
        }
        if !self.r.is_finite() {
            return Err(Error::param("black-scholes r must be finite"));
        }
        Ok(())
    }
}

fn check_order(t: f64, u: f64) -> Result<()> {
    if t > u || t.is_nan() || u.is_nan() {
        return Err(Error::domain(format!("require t <= T, got t={t}, T={u}")));
    }
    Ok(())
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn d1_d2(tau: f64, s: f64, strike: f64, r: f64, sigma: f64) -> (f64, f64) {
    let vol = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (r + 0.5 * sigma * sigma) * tau) / vol;
    (d1, d1 - vol)
}

/// European call under Black-Scholes. At or past expiry the intrinsic
/// value is returned.
pub fn bs_call(t: f64, maturity: f64, s: f64, strike: f64, r: f64, sigma: f64) -> f64 {
    let tau = maturity - t;
    if tau <= 0.0 {
        return (s - strike).max(0.0);
    }
    let (d1, d2) = d1_d2(tau, s, strike, r, sigma);
    normal_cdf(d1) * s - normal_cdf(d2) * strike * (-r * tau).exp()
}

/// Value of the payoff `max(S_T, G)` under Black-Scholes:
/// `Φ(d₁)S + G e^{-rτ} Φ(-d₂)`. At or past expiry returns `max(S, G)`.
pub fn bs_endowment(t: f64, maturity: f64, s: f64, guarantee: f64, r: f64, sigma: f64) -> f64 {
    let tau = maturity - t;
    if tau <= 0.0 {
        return s.max(guarantee);
    }
    let (d1, d2) = d1_d2(tau, s, guarantee, r, sigma);
    normal_cdf(d1) * s + guarantee * (-r * tau).exp() * normal_cdf(-d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vasicek() -> VasicekParams {
        VasicekParams::new(0.3, 0.01, 0.02, 0.01).unwrap()
    }

    fn heston() -> HestonParams {
        HestonParams {
            kappa: 1e-3,
            nu_bar: 0.01,
            eta: 0.01,
            nu0: 0.04,
            mu: 0.015,
            s0: 100.0,
        }
    }

    #[test]
    fn bond_b_boundaries() {
        let p = vasicek();
        assert_eq!(p.b(3.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(
            p.b(0.0, 1.0).unwrap(),
            0.863_939_264_394_273_8,
            max_relative = 1e-15
        );
        let tiny = VasicekParams::new(1e-8, 0.01, 0.02, 0.01).unwrap();
        assert_relative_eq!(tiny.b(0.0, 1.0).unwrap(), 1.0, epsilon = 1e-8);
        assert!(p.b(2.0, 1.0).is_err());
    }

    #[test]
    fn bond_a_and_price() {
        let p = vasicek();
        assert_eq!(p.a(5.0, 5.0).unwrap(), 1.0);
        assert_eq!(p.zcb_price(5.0, 5.0, 0.07).unwrap(), 1.0);
        assert!(p.a(1.0, 0.5).is_err());
        assert!(p.zcb_price(1.0, 0.5, 0.0).is_err());

        // Deterministic rate: A(0,T) = e^{θ(B - T)}.
        let flat = VasicekParams::new(0.3, 0.02, 0.0, 0.02).unwrap();
        let b = flat.b(0.0, 7.0).unwrap();
        assert_relative_eq!(
            flat.a(0.0, 7.0).unwrap(),
            (0.02 * (b - 7.0)).exp(),
            max_relative = 1e-14
        );

        let price = p.zcb_price(0.0, 10.0, 0.01).unwrap();
        let expected = p.a(0.0, 10.0).unwrap() * (-p.b(0.0, 10.0).unwrap() * 0.01).exp();
        assert_eq!(price, expected);
        assert!(p.zcb_price(0.0, 10.0, 0.02).unwrap() < price);
    }

    #[test]
    fn conditional_moments() {
        let p = vasicek();
        assert_eq!(p.conditional_moments(2.0, 2.0, 0.05).unwrap(), (0.05, 0.0));
        let (m, v) = p.conditional_moments(0.0, 1.0, 0.01).unwrap();
        assert_relative_eq!(m, 0.01, max_relative = 1e-15);
        assert_relative_eq!(
            v,
            0.0004 / 0.6 * (1.0 - (-0.6f64).exp()),
            max_relative = 1e-14
        );
        let (m, v) = p.conditional_moments(0.0, 500.0, 0.08).unwrap();
        assert_relative_eq!(m, 0.01, max_relative = 1e-12);
        assert_relative_eq!(v, 0.0004 / 0.6, max_relative = 1e-12);
        assert!(p.conditional_moments(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn forward_variance_map() {
        let h = heston();
        assert_eq!(h.forward_variance(2.0, 2.0, 0.3).unwrap(), 0.3);
        let xi = h.forward_variance(0.0, 10.0, 0.04).unwrap();
        assert_relative_eq!(xi, 0.039_701_495_012_475_04, max_relative = 1e-14);
        let nu = h.nu_from_forward_variance(0.0, 10.0, 0.039_701_5).unwrap();
        assert_relative_eq!(nu, 0.04, epsilon = 1e-8);
        assert_eq!(
            h.nu_from_forward_variance(0.0, 10.0, h.nu_bar).unwrap(),
            h.nu_bar
        );
        assert!(h.forward_variance(1.0, 0.0, 0.1).is_err());
        assert!(h.nu_from_forward_variance(1.0, 0.0, 0.1).is_err());

        // No decay as kappa vanishes.
        let slow = HestonParams { kappa: 1e-300, ..h };
        assert_eq!(slow.forward_variance(0.0, 30.0, 0.07).unwrap(), 0.07);
    }

    #[test]
    fn lambda_values() {
        let h = heston();
        assert_relative_eq!(
            h.lambda(3.0, 3.0, 0.09).unwrap(),
            0.01 * 0.3,
            max_relative = 1e-15
        );
        let zero_eta = HestonParams { eta: 0.0, ..h };
        assert_eq!(zero_eta.lambda(0.0, 10.0, 0.0397).unwrap(), 0.0);
        let xi = h.forward_variance(0.0, 10.0, 0.04).unwrap();
        assert_relative_eq!(
            h.lambda(0.0, 10.0, xi).unwrap(),
            (-0.01f64).exp() * 0.01 * 0.2,
            max_relative = 1e-12
        );
        assert!(h.lambda(0.0, 10.0, -1.0).is_err());
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_relative_eq!(normal_cdf(1.959_963_985), 0.975, epsilon = 1e-9);
        for i in 0..=160 {
            let x = -8.0 + 0.1 * i as f64;
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn call_limits() {
        assert_relative_eq!(
            bs_call(0.0, 1.0, 1.0, 1e-12, 0.01, 0.04),
            1.0,
            epsilon = 1e-12
        );
        assert!(bs_call(0.0, 0.1, 1.0, 10.0, 0.01, 0.04) < 1e-300);
        assert_eq!(bs_call(1.0, 1.0, 1.5, 1.0, 0.01, 0.04), 0.5);
        assert_eq!(bs_call(1.0, 1.0, 0.7, 1.0, 0.01, 0.04), 0.0);
    }

    #[test]
    fn endowment_limits() {
        assert_eq!(bs_endowment(2.0, 2.0, 0.8, 1.0, 0.01, 0.04), 1.0);
        assert_eq!(bs_endowment(2.0, 2.0, 1.2, 1.0, 0.01, 0.04), 1.2);
        assert_relative_eq!(
            bs_endowment(0.0, 1.0, 1.0, 1e-12, 0.01, 0.04),
            1.0,
            epsilon = 1e-12
        );
        let expected = bs_call(0.0, 1.0, 1.0, 1.0, 0.01, 0.04) + (-0.01f64).exp();
        assert_relative_eq!(
            bs_endowment(0.0, 1.0, 1.0, 1.0, 0.01, 0.04),
            expected,
            epsilon = 1e-14
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(VasicekParams::new(0.0, 0.01, 0.02, 0.01).is_err());
        assert!(VasicekParams::new(0.3, 0.01, -0.02, 0.01).is_err());
        assert!(VasicekParams::new(0.3, 0.01, 0.02, f64::NAN).is_err());
        assert!(HestonParams {
            kappa: 0.0,
            ..heston()
        }
        .validate()
        .is_err());
        assert!(HestonParams {
            s0: 0.0,
            ..heston()
        }
        .validate()
        .is_err());
        assert!(HestonParams {
            nu0: -0.1,
            ..heston()
        }
        .validate()
        .is_err());
        assert!(heston().validate().is_ok());
        let bs = BlackScholesParams {
            s0: 1.0,
            r: 0.01,
            sigma: 0.0,
        };
        assert!(bs.validate().is_err());
    }
}
