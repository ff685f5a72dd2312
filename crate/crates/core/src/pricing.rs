//! Single and continuous-rate premiums for unit-linked pure endowments and
//! endowments with a death benefit.
//!
//! Survival probabilities are deterministic multipliers: the financial
//! market and the insured's state are independent, so every Monte Carlo
//! quantity is an average over market paths weighted by survival and
//! hazard terms computed from the mortality law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_models::{bs_endowment, BlackScholesParams, HestonParams, VasicekParams};
use crate::mc_engine::{
    mc_estimate, PathBuffer, PathSet, PriceEstimate, RateDrift, TimeGrid, VhSimulator,
};
use crate::mortality::GompertzMakehamFit;
use crate::quadrature::adaptive_simpson;

const QUAD_TOL: f64 = 1e-10;

/// Contract terms. `g_d` is present exactly when the policy pays a death
/// benefit `max(G_d, S_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    /// Age at inception.
    pub age: f64,
    pub maturity: f64,
    pub g_e: f64,
    pub g_d: Option<f64>,
}

impl PolicySpec {
    pub fn pure_endowment(age: f64, maturity: f64, g_e: f64) -> Result<Self> {
        let p = Self {
            age,
            maturity,
            g_e,
            g_d: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_death_benefit(age: f64, maturity: f64, g_e: f64, g_d: f64) -> Result<Self> {
        let p = Self {
            age,
            maturity,
            g_e,
            g_d: Some(g_d),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn has_death_benefit(&self) -> bool {
        self.g_d.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.age >= 0.0 && self.age.is_finite()) {
            return Err(Error::param(format!(
                "policy age must be >= 0, got {}",
                self.age
            )));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::param(format!(
                "policy maturity must be > 0, got {}",
                self.maturity
            )));
        }
        if !(self.g_e > 0.0 && self.g_e.is_finite()) {
            return Err(Error::param(format!(
                "endowment guarantee must be > 0, got {}",
                self.g_e
            )));
        }
        if let Some(g_d) = self.g_d {
            if !(g_d > 0.0 && g_d.is_finite()) {
                return Err(Error::param(format!(
                    "death guarantee must be > 0, got {g_d}"
                )));
            }
        }
        Ok(())
    }
}

/// Single premium and the continuous premium rate that finances it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumQuote {
    pub single: f64,
    /// Premium per year paid continuously while alive.
    pub yearly: f64,
    /// Monte Carlo error of `single`; `None` for closed-form quotes.
    pub estimate: Option<PriceEstimate>,
}

/// Monte Carlo controls for the Vasicek-Heston side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub rate_drift: RateDrift,
}

impl McSettings {
    pub fn grid(&self, maturity: f64) -> Result<TimeGrid> {
        TimeGrid::with_steps_per_year(maturity, self.steps_per_year)
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::param("monte carlo needs at least 2 paths"));
        }
        if self.steps_per_year == 0 {
            return Err(Error::param("steps per year must be >= 1"));
        }
        Ok(())
    }
}

/// How the Black-Scholes death-benefit premium is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeathBenefitFormula {
    /// Survival-weighted endowment term plus
    /// `∫ BSE(0,s,S₀,G_d) p(x,x+s) μ(x+s) ds`.
    #[default]
    Reserve,
    /// Endowment term without the survival factor and an extra `e^{-rs}`
    /// inside the death integral.
    StrictPaper,
}

/// `max(S_T, G)`.
pub fn endowment_payoff(s_t: f64, guarantee: f64) -> f64 {
    s_t.max(guarantee)
}

/// `∫₀^T e^{-rs} p(x, x+s) ds`.
pub fn annuity_factor_bs(x: f64, maturity: f64, r: f64, fit: &GompertzMakehamFit) -> f64 {
    adaptive_simpson(
        |s| (-r * s).exp() * fit.survival_probability(x, s),
        0.0,
        maturity,
        QUAD_TOL,
    )
}

fn bs_quote(
    single: f64,
    policy: &PolicySpec,
    bs: &BlackScholesParams,
    fit: &GompertzMakehamFit,
) -> PremiumQuote {
    PremiumQuote {
        single,
        yearly: single / annuity_factor_bs(policy.age, policy.maturity, bs.r, fit),
        estimate: None,
    }
}

/// Closed-form pure endowment: `BSE(0,T,S₀,G_e) · p(x,x+T)`.
pub fn pure_endowment_bs(
    policy: &PolicySpec,
    bs: &BlackScholesParams,
    fit: &GompertzMakehamFit,
) -> Result<PremiumQuote> {
    policy.validate()?;
    bs.validate()?;
    let bse = bs_endowment(0.0, policy.maturity, bs.s0, policy.g_e, bs.r, bs.sigma);
    let single = bse * fit.survival_probability(policy.age, policy.maturity);
    Ok(bs_quote(single, policy, bs, fit))
}

/// Closed-form endowment with death benefit.
pub fn endowment_with_death_benefit_bs(
    policy: &PolicySpec,
    bs: &BlackScholesParams,
    fit: &GompertzMakehamFit,
    formula: DeathBenefitFormula,
) -> Result<PremiumQuote> {
    policy.validate()?;
    bs.validate()?;
    let g_d = policy
        .g_d
        .ok_or_else(|| Error::param("policy has no death benefit"))?;
    let (x, big_t) = (policy.age, policy.maturity);
    let bse_t = bs_endowment(0.0, big_t, bs.s0, policy.g_e, bs.r, bs.sigma);
    let death_density = |s: f64| {
        bs_endowment(0.0, s, bs.s0, g_d, bs.r, bs.sigma)
            * fit.survival_probability(x, s)
            * fit.hazard(x + s)
    };
    let single = match formula {
        DeathBenefitFormula::Reserve => {
            bse_t * fit.survival_probability(x, big_t)
                + adaptive_simpson(death_density, 0.0, big_t, QUAD_TOL)
        }
        DeathBenefitFormula::StrictPaper => {
            bse_t
                + adaptive_simpson(
                    |s| (-bs.r * s).exp() * death_density(s),
                    0.0,
                    big_t,
                    QUAD_TOL,
                )
        }
    };
    Ok(bs_quote(single, policy, bs, fit))
}

/// Node weights `w_k p(x, x+t_k)` of the trapezoidal annuity integral.
fn annuity_weights(grid: &TimeGrid, x: f64, fit: &GompertzMakehamFit) -> Vec<f64> {
    grid.trapezoid_weights()
        .iter()
        .zip(grid.nodes())
        .map(|(w, t)| w * fit.survival_probability(x, *t))
        .collect()
}

/// `∫₀^T E[D_{0,s}] p(x,x+s) ds` by the trapezoidal rule over the path
/// grid, with `E[D_{0,t_k}]` the sample mean of the pathwise discounts.
pub fn mc_annuity_factor_vh(x: f64, paths: &PathSet, fit: &GompertzMakehamFit) -> f64 {
    let grid = paths.grid();
    let weights = annuity_weights(grid, x, fit);
    let n = paths.n_paths() as f64;
    let mut mean_discount = vec![0.0; grid.steps() + 1];
    for i in 0..paths.n_paths() {
        for (m, d) in mean_discount.iter_mut().zip(paths.discounts(i)) {
            *m += d;
        }
    }
    weights
        .iter()
        .zip(&mean_discount)
        .map(|(w, m)| w * m / n)
        .sum()
}

/// Per-path Monte Carlo contributions for one policy.
struct PathTotals {
    value: f64,
    annuity: f64,
}

fn simulate_policy(
    policy: &PolicySpec,
    vp: &VasicekParams,
    hp: &HestonParams,
    fit: &GompertzMakehamFit,
    mc: &McSettings,
) -> Result<Vec<PathTotals>> {
    policy.validate()?;
    mc.validate()?;
    let grid = mc.grid(policy.maturity)?;
    let n_steps = grid.steps();
    let x = policy.age;
    let survival_t = fit.survival_probability(x, policy.maturity);
    let annuity_w = annuity_weights(&grid, x, fit);
    let death_w: Option<Vec<f64>> = policy.g_d.map(|_| {
        annuity_w
            .iter()
            .zip(grid.nodes())
            .map(|(w, t)| w * fit.hazard(x + t))
            .collect()
    });
    let sim = VhSimulator::new(*vp, *hp, grid, mc.rate_drift)?;
    sim.map_paths(mc.n_paths, mc.seed, |_, b: &PathBuffer| {
        let mut value =
            b.discount[n_steps] * endowment_payoff(b.s[n_steps], policy.g_e) * survival_t;
        if let (Some(g_d), Some(w)) = (policy.g_d, &death_w) {
            value += w
                .iter()
                .zip(&b.discount)
                .zip(&b.s)
                .map(|((w, d), s)| w * d * endowment_payoff(*s, g_d))
                .sum::<f64>();
        }
        let annuity = annuity_w.iter().zip(&b.discount).map(|(w, d)| w * d).sum();
        PathTotals { value, annuity }
    })
}

fn vh_quote(totals: &[PathTotals], seed: u64) -> Result<PremiumQuote> {
    let values: Vec<f64> = totals.iter().map(|t| t.value).collect();
    let estimate = mc_estimate(&values)?.with_seed(seed);
    let annuity = totals.iter().map(|t| t.annuity).sum::<f64>() / totals.len() as f64;
    Ok(PremiumQuote {
        single: estimate.mean,
        yearly: estimate.mean / annuity,
        estimate: Some(estimate),
    })
}

/// Monte Carlo pure endowment: `E[D_{0,T} max(S_T, G_e)] · p(x,x+T)`.
/// A death benefit on `policy` is ignored.
pub fn pure_endowment_vh(
    policy: &PolicySpec,
    vp: &VasicekParams,
    hp: &HestonParams,
    fit: &GompertzMakehamFit,
    mc: &McSettings,
) -> Result<PremiumQuote> {
    let pure = PolicySpec {
        g_d: None,
        ..*policy
    };
    vh_quote(&simulate_policy(&pure, vp, hp, fit, mc)?, mc.seed)
}

/// Monte Carlo endowment with death benefit: the pure endowment plus
/// `∫₀^T E[D_{0,s} max(G_d, S_s)] p(x,x+s) μ(x+s) ds` on the path grid.
pub fn endowment_with_death_benefit_vh(
    policy: &PolicySpec,
    vp: &VasicekParams,
    hp: &HestonParams,
    fit: &GompertzMakehamFit,
    mc: &McSettings,
) -> Result<PremiumQuote> {
    if !policy.has_death_benefit() {
        return Err(Error::param("policy has no death benefit"));
    }
    vh_quote(&simulate_policy(policy, vp, hp, fit, mc)?, mc.seed)
}

/// Discounted endowment payoffs `D_{0,T} max(S_T, G)` per path, without
/// mortality.
pub fn discounted_payoffs_vh(
    maturity: f64,
    guarantee: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
    mc: &McSettings,
) -> Result<Vec<f64>> {
    Ok(terminal_states(maturity, vp, hp, mc)?
        .into_iter()
        .map(|(d, s)| d * endowment_payoff(s, guarantee))
        .collect())
}

/// `E[D_{0,T} max(S_T, G)]` without mortality.
pub fn endowment_value_vh(
    maturity: f64,
    guarantee: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
    mc: &McSettings,
) -> Result<PriceEstimate> {
    let payoffs = discounted_payoffs_vh(maturity, guarantee, vp, hp, mc)?;
    Ok(mc_estimate(&payoffs)?.with_seed(mc.seed))
}

/// `(D_{0,T}, S_T)` for every path.
fn terminal_states(
    maturity: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
    mc: &McSettings,
) -> Result<Vec<(f64, f64)>> {
    mc.validate()?;
    let grid = mc.grid(maturity)?;
    let n = grid.steps();
    let sim = VhSimulator::new(*vp, *hp, grid, mc.rate_drift)?;
    sim.map_paths(mc.n_paths, mc.seed, |_, b| (b.discount[n], b.s[n]))
}

/// Pure-endowment single premiums on an (age × guarantee) grid for one
/// maturity, all cells priced from the same paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSurface {
    pub maturity: f64,
    pub ages: Vec<f64>,
    pub guarantees: Vec<f64>,
    /// `premium[i][j]` for `ages[i]`, `guarantees[j]`.
    pub premium: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

pub fn price_surface(
    ages: &[f64],
    guarantees: &[f64],
    maturity: f64,
    vp: &VasicekParams,
    hp: &HestonParams,
    fit: &GompertzMakehamFit,
    mc: &McSettings,
) -> Result<PriceSurface> {
    if ages.is_empty() || guarantees.is_empty() {
        return Err(Error::param(
            "price surface needs nonempty age and guarantee grids",
        ));
    }
    for &age in ages {
        PolicySpec::pure_endowment(age, maturity, guarantees[0])?;
    }
    for &g in guarantees {
        PolicySpec::pure_endowment(ages[0], maturity, g)?;
    }
    let states = terminal_states(maturity, vp, hp, mc)?;
    let per_guarantee: Vec<PriceEstimate> = guarantees
        .iter()
        .map(|g| {
            let payoffs: Vec<f64> = states
                .iter()
                .map(|(d, s)| d * endowment_payoff(*s, *g))
                .collect();
            mc_estimate(&payoffs)
        })
        .collect::<Result<_>>()?;

    let mut premium = Vec::with_capacity(ages.len());
    let mut stderr = Vec::with_capacity(ages.len());
    for &age in ages {
        let p = fit.survival_probability(age, maturity);
        premium.push(per_guarantee.iter().map(|e| e.scaled(p).mean).collect());
        stderr.push(per_guarantee.iter().map(|e| e.scaled(p).stderr).collect());
    }
    Ok(PriceSurface {
        maturity,
        ages: ages.to_vec(),
        guarantees: guarantees.to_vec(),
        premium,
        stderr,
    })
}
