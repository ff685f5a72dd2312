//! The five CLI verbs. Each writes its CSV files plus the resolved config
//! into the output directory and returns the manifest.

use statrs::distribution::{ContinuousCDF, Normal};

use super::config::{PolicyKind, RunConfig};
use super::report::{into_bytes, ReportBundle};
use crate::error::{Error, Result};
use crate::market_models::bs_endowment;
use crate::mortality::{empirical_hazard, fit_gompertz_makeham, MortalityTable};
use crate::pricing::{
    discounted_payoffs_vh, endowment_value_vh, endowment_with_death_benefit_bs,
    endowment_with_death_benefit_vh, price_surface, pure_endowment_bs, pure_endowment_vh,
    PolicySpec,
};

/// Shortest decimal that round-trips to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn start(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new(&cfg.out_dir)?;
    bundle.emit("resolved_config.toml", cfg.to_toml()?.as_bytes())?;
    Ok(bundle)
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    into_bytes(w)
}

/// Fit the hazard to `table` (or the configured/bundled table) and emit
/// `fit.csv` and `hazard_curve.csv` (ages 0..=100).
pub fn cmd_fit_mortality(cfg: &RunConfig, table: Option<&std::path::Path>) -> Result<ReportBundle> {
    let table = match table {
        Some(path) => MortalityTable::from_path(path)?,
        None => cfg.mortality_table()?,
    };
    let obs = empirical_hazard(&table);
    let fit = fit_gompertz_makeham(&obs, cfg.fit_window())?;

    let mut bundle = start(cfg)?;
    bundle.emit(
        "fit.csv",
        &csv_bytes(
            &["a", "b", "c", "window_lo", "window_hi", "sse"],
            [[
                fit.a,
                fit.b,
                fit.c,
                fit.fit_window.lo,
                fit.fit_window.hi,
                fit.residual,
            ]
            .map(num)],
        )?,
    )?;
    let curve = (0..=100).map(|age| {
        let age = age as f64;
        let observed = obs
            .iter()
            .find(|(a, _)| *a == age)
            .map_or(String::new(), |(_, rate)| num(*rate));
        [num(age), num(fit.hazard(age)), observed]
    });
    bundle.emit(
        "hazard_curve.csv",
        &csv_bytes(&["age", "hazard", "observed"], curve)?,
    )?;
    bundle.finish()
}

/// Survival-free endowment value `max(S_T, G_e)` under both models.
pub fn cmd_compare_models(cfg: &RunConfig) -> Result<ReportBundle> {
    let mc = cfg.mc_settings();
    let bs = &cfg.blackscholes;
    let g = cfg.policy.g_e;
    let mut rows = Vec::new();
    for &t in &cfg.policy.maturities {
        let bs_price = bs_endowment(0.0, t, bs.s0, g, bs.r, bs.sigma);
        let vh = endowment_value_vh(t, g, &cfg.vasicek, &cfg.heston, &mc)?;
        rows.push([num(t), num(bs_price), num(vh.mean), num(vh.stderr)]);
    }
    let mut bundle = start(cfg)?;
    bundle.emit(
        "compare.csv",
        &csv_bytes(&["T", "bs_price", "vh_price", "vh_stderr"], rows)?,
    )?;
    bundle.finish()
}

/// Pure-endowment premiums over the age × guarantee grid, one block per
/// maturity.
pub fn cmd_price_surface(cfg: &RunConfig) -> Result<ReportBundle> {
    let (_, fit) = cfg.fit_mortality()?;
    let mc = cfg.mc_settings();
    let p = &cfg.policy;
    let mut rows = Vec::new();
    for &t in &p.maturities {
        let surface = price_surface(
            &p.ages,
            &p.guarantees,
            t,
            &cfg.vasicek,
            &cfg.heston,
            &fit,
            &mc,
        )?;
        for (i, age) in surface.ages.iter().enumerate() {
            for (j, g) in surface.guarantees.iter().enumerate() {
                rows.push([
                    num(t),
                    num(*age),
                    num(*g),
                    num(surface.premium[i][j]),
                    num(surface.stderr[i][j]),
                ]);
            }
        }
    }
    let mut bundle = start(cfg)?;
    bundle.emit(
        "surface.csv",
        &csv_bytes(&["T", "age", "guarantee", "premium", "stderr"], rows)?,
    )?;
    bundle.finish()
}

/// `(theoretical standard-normal quantile, standardized sample quantile)`
/// at plotting positions `(i + 1/2)/n`.
pub fn qq_pairs(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let standardized = if sd > 0.0 { (x - mean) / sd } else { 0.0 };
            (normal.inverse_cdf((i as f64 + 0.5) / nf), standardized)
        })
        .collect())
}

/// Per-path discounted endowment payoffs (survival fixed at 1) and their
/// normal QQ data.
pub fn cmd_distribution(cfg: &RunConfig) -> Result<ReportBundle> {
    let mc = cfg.mc_settings();
    let mut payoff_rows = Vec::new();
    let mut qq_rows = Vec::new();
    for &t in &cfg.policy.maturities {
        let payoffs = discounted_payoffs_vh(t, cfg.policy.g_e, &cfg.vasicek, &cfg.heston, &mc)?;
        for (i, v) in payoffs.iter().enumerate() {
            payoff_rows.push([num(t), i.to_string(), num(*v)]);
        }
        for (theoretical, sample) in qq_pairs(&payoffs)? {
            qq_rows.push([num(t), num(theoretical), num(sample)]);
        }
    }
    let mut bundle = start(cfg)?;
    bundle.emit(
        "distribution_payoffs.csv",
        &csv_bytes(&["T", "path", "discounted_payoff"], payoff_rows)?,
    )?;
    bundle.emit(
        "distribution_qq.csv",
        &csv_bytes(&["T", "normal_quantile", "sample_quantile"], qq_rows)?,
    )?;
    bundle.finish()
}

/// Single and continuous-rate premiums under both models per maturity.
pub fn cmd_premiums(cfg: &RunConfig) -> Result<ReportBundle> {
    let (_, fit) = cfg.fit_mortality()?;
    let mc = cfg.mc_settings();
    let p = &cfg.policy;
    let mut rows = Vec::new();
    for &t in &p.maturities {
        let (bs, vh) = match p.kind {
            PolicyKind::Pure => {
                let policy = PolicySpec::pure_endowment(p.age, t, p.g_e)?;
                (
                    pure_endowment_bs(&policy, &cfg.blackscholes, &fit)?,
                    pure_endowment_vh(&policy, &cfg.vasicek, &cfg.heston, &fit, &mc)?,
                )
            }
            PolicyKind::DeathBenefit => {
                let policy = PolicySpec::with_death_benefit(p.age, t, p.g_e, p.g_d)?;
                (
                    endowment_with_death_benefit_bs(
                        &policy,
                        &cfg.blackscholes,
                        &fit,
                        cfg.death_benefit_formula(),
                    )?,
                    endowment_with_death_benefit_vh(&policy, &cfg.vasicek, &cfg.heston, &fit, &mc)?,
                )
            }
        };
        let stderr = vh.estimate.map_or(0.0, |e| e.stderr);
        rows.push([
            num(t),
            num(bs.single),
            num(vh.single),
            num(stderr),
            num(bs.yearly),
            num(vh.yearly),
        ]);
    }
    let mut bundle = start(cfg)?;
    bundle.emit(
        "premiums.csv",
        &csv_bytes(
            &[
                "T",
                "bs_single",
                "vh_single",
                "vh_stderr",
                "bs_yearly",
                "vh_yearly",
            ],
            rows,
        )?,
    )?;
    bundle.finish()
}
