//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_models::{BlackScholesParams, HestonParams, VasicekParams};
use crate::mc_engine::RateDrift;
use crate::mortality::{
    empirical_hazard, fit_gompertz_makeham, FitWindow, GompertzMakehamFit, MortalityTable,
};
use crate::pricing::{DeathBenefitFormula, McSettings, PolicySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    #[default]
    Pure,
    DeathBenefit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Age used by `premiums`.
    pub age: f64,
    pub g_e: f64,
    pub g_d: f64,
    /// Age grid of `price-surface`.
    pub ages: Vec<f64>,
    /// Guarantee grid of `price-surface`.
    pub guarantees: Vec<f64>,
    pub maturities: Vec<f64>,
    pub strict_paper: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::Pure,
            age: 40.0,
            g_e: 100.0,
            g_d: 100.0,
            ages: (4..=16).map(|i| 5.0 * i as f64).collect(),
            guarantees: (5..=15).map(|i| 10.0 * i as f64).collect(),
            maturities: vec![10.0, 20.0, 30.0, 40.0],
            strict_paper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub rate_drift: RateDrift,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 5000,
            steps_per_year: 252,
            seed: 20_200_101,
            rate_drift: RateDrift::Corollary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MortalityConfig {
    /// CSV table; the bundled Norwegian table when absent.
    pub path: Option<PathBuf>,
    pub window_lo: f64,
    pub window_hi: f64,
}

impl Default for MortalityConfig {
    fn default() -> Self {
        let w = FitWindow::default();
        Self {
            path: None,
            window_lo: w.lo,
            window_hi: w.hi,
        }
    }
}

/// Everything a CLI run needs. Missing sections and keys take the
/// defaults of the reference experiment; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub vasicek: VasicekParams,
    pub heston: HestonParams,
    pub blackscholes: BlackScholesParams,
    pub policy: PolicyConfig,
    pub mc: McConfig,
    pub mortality: MortalityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            vasicek: VasicekParams {
                k: 0.3,
                theta: 0.01,
                sigma: 0.02,
                r0: 0.01,
            },
            heston: HestonParams {
                kappa: 1e-3,
                nu_bar: 0.01,
                eta: 0.01,
                nu0: 0.04,
                mu: 0.015,
                s0: 100.0,
            },
            blackscholes: BlackScholesParams {
                s0: 100.0,
                r: 0.01,
                sigma: 0.04,
            },
            policy: PolicyConfig::default(),
            mc: McConfig::default(),
            mortality: MortalityConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub strict_paper: bool,
    pub policy: Option<PolicyKind>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.mc.seed = seed;
        }
        if let Some(paths) = o.paths {
            self.mc.n_paths = paths;
        }
        if let Some(steps) = o.steps {
            self.mc.steps_per_year = steps;
        }
        if let Some(out) = &o.out {
            self.out_dir = out.clone();
        }
        if o.strict_paper {
            self.policy.strict_paper = true;
        }
        if let Some(kind) = o.policy {
            self.policy.kind = kind;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Error::Config(msg);
        self.vasicek
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.heston.validate().map_err(|e| invalid(e.to_string()))?;
        self.blackscholes
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        let p = &self.policy;
        if p.ages.is_empty() {
            return Err(invalid("policy.ages must not be empty".into()));
        }
        if p.guarantees.is_empty() {
            return Err(invalid("policy.guarantees must not be empty".into()));
        }
        if p.maturities.is_empty() {
            return Err(invalid("policy.maturities must not be empty".into()));
        }
        for &t in &p.maturities {
            PolicySpec::with_death_benefit(p.age, t, p.g_e, p.g_d)
                .map_err(|e| invalid(e.to_string()))?;
            for &age in &p.ages {
                PolicySpec::pure_endowment(age, t, p.g_e).map_err(|e| invalid(e.to_string()))?;
            }
            for &g in &p.guarantees {
                PolicySpec::pure_endowment(p.age, t, g).map_err(|e| invalid(e.to_string()))?;
            }
        }
        if self.mc.n_paths < 2 {
            return Err(invalid("mc.n_paths must be >= 2".into()));
        }
        if self.mc.steps_per_year == 0 {
            return Err(invalid("mc.steps_per_year must be >= 1".into()));
        }
        let m = &self.mortality;
        if !(m.window_lo <= m.window_hi) {
            return Err(invalid(
                "mortality.window_lo must not exceed window_hi".into(),
            ));
        }
        Ok(())
    }

    pub fn mc_settings(&self) -> McSettings {
        McSettings {
            n_paths: self.mc.n_paths,
            steps_per_year: self.mc.steps_per_year,
            seed: self.mc.seed,
            rate_drift: self.mc.rate_drift,
        }
    }

    pub fn fit_window(&self) -> FitWindow {
        FitWindow {
            lo: self.mortality.window_lo,
            hi: self.mortality.window_hi,
        }
    }

    pub fn death_benefit_formula(&self) -> DeathBenefitFormula {
        if self.policy.strict_paper {
            DeathBenefitFormula::StrictPaper
        } else {
            DeathBenefitFormula::Reserve
        }
    }

    pub fn mortality_table(&self) -> Result<MortalityTable> {
        match &self.mortality.path {
            Some(path) => MortalityTable::from_path(path),
            None => Ok(MortalityTable::bundled()),
        }
    }

    pub fn fit_mortality(&self) -> Result<(MortalityTable, GompertzMakehamFit)> {
        let table = self.mortality_table()?;
        let fit = fit_gompertz_makeham(&empirical_hazard(&table), self.fit_window())?;
        Ok((table, fit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::from_toml("[mc]\nn_paths = 100\n").unwrap();
        assert_eq!(cfg.mc.n_paths, 100);
        assert_eq!(cfg.mc.steps_per_year, 252);
        assert_eq!(cfg.vasicek.k, 0.3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_toml("[mc]\npaths = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("[extra]\na = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("[heston]\nrho = 0.5\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_age_grid_is_invalid() {
        let cfg = RunConfig::from_toml("[policy]\nages = []\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            seed: Some(9),
            paths: Some(10),
            steps: Some(12),
            out: Some("elsewhere".into()),
            strict_paper: true,
            policy: Some(PolicyKind::DeathBenefit),
        });
        assert_eq!(cfg.mc.seed, 9);
        assert_eq!(cfg.mc.n_paths, 10);
        assert_eq!(cfg.mc.steps_per_year, 12);
        assert_eq!(cfg.out_dir, PathBuf::from("elsewhere"));
        assert_eq!(
            cfg.death_benefit_formula(),
            DeathBenefitFormula::StrictPaper
        );
        assert_eq!(cfg.policy.kind, PolicyKind::DeathBenefit);
    }
}
