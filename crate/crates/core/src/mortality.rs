//! Mortality table ingestion, Gompertz-Makeham fitting and two-state
//! (alive/dead) survival probabilities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norwegian 2018 mortality per 100 000 inhabitants (Statistics Norway,
/// table 05381). The open `>=90` row is stored as age 90.
pub const NORWAY_2018_CSV: &str = include_str!("../data/norway_2018.csv");

const PER_CAPITA: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortalityRow {
    pub age: f64,
    pub deaths_men: f64,
    pub deaths_women: f64,
    pub deaths_total: f64,
}

/// Death counts per 100 000 by age.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    rows: Vec<MortalityRow>,
}

impl MortalityTable {
    pub fn rows(&self) -> &[MortalityRow] {
        &self.rows
    }

    pub fn bundled() -> Self {
        load_mortality_table(NORWAY_2018_CSV).expect("bundled mortality table is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        load_mortality_table(&text)
    }
}

const HEADER: [&str; 4] = ["age", "men", "women", "total"];

/// Parse CSV text with header `age,men,women,total`.
pub fn load_mortality_table(source: &str) -> Result<MortalityTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h.map_err(|e| csv_parse_error(&e))?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty mortality table".into(),
            })
        }
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {}, found {}",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_parse_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let mut values = [0.0; 4];
        for (slot, (field, name)) in values.iter_mut().zip(record.iter().zip(HEADER)) {
            *slot = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {name}: cannot parse {field:?} as a number"),
            })?;
            if !slot.is_finite() || *slot < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("column {name}: value must be finite and >= 0, got {field}"),
                });
            }
        }
        rows.push(MortalityRow {
            age: values[0],
            deaths_men: values[1],
            deaths_women: values[2],
            deaths_total: values[3],
        });
    }

    if rows.is_empty() {
        return Err(Error::Validation("mortality table has no data rows".into()));
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].age <= w[0].age) {
        return Err(Error::Validation(format!(
            "ages must be strictly increasing, found {} after {}",
            w[1].age, w[0].age
        )));
    }
    Ok(MortalityTable { rows })
}

fn csv_parse_error(e: &csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// `(age, total deaths / 100 000)` for every row.
pub fn empirical_hazard(table: &MortalityTable) -> Vec<(f64, f64)> {
    table
        .rows
        .iter()
        .map(|r| (r.age, r.deaths_total / PER_CAPITA))
        .collect()
}

/// Inclusive age range used by the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for FitWindow {
    /// Drops the first (age 4) and the open last (>= 90) rows.
    fn default() -> Self {
        Self { lo: 9.0, hi: 89.0 }
    }
}

/// Gompertz-Makeham hazard `μ(x) = a + b e^{c x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzMakehamFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub fit_window: FitWindow,
    /// Sum of squared hazard errors over the window.
    pub residual: f64,
}

impl GompertzMakehamFit {
    /// A hazard with given coefficients and no fit provenance.
    pub fn from_params(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(c > 0.0)
            || b < 0.0
            || a + b < 0.0
            || !a.is_finite()
            || !b.is_finite()
            || !c.is_finite()
        {
            return Err(Error::param(format!(
                "gompertz-makeham needs c > 0, b >= 0, a + b >= 0; got a={a}, b={b}, c={c}"
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            fit_window: FitWindow { lo: 0.0, hi: 0.0 },
            residual: 0.0,
        })
    }

    /// Zero mortality.
    pub fn immortal() -> Self {
        Self::from_params(0.0, 0.0, 0.1).expect("valid")
    }

    pub fn hazard(&self, age: f64) -> f64 {
        self.a + self.b * (self.c * age).exp()
    }

    /// `∫_x^{x+T} μ = aT + (b/c) e^{cx}(e^{cT} - 1)`.
    pub fn integrated_hazard(&self, x: f64, horizon: f64) -> f64 {
        self.a * horizon + self.b / self.c * (self.c * x).exp() * (self.c * horizon).exp_m1()
    }

    /// `_T p_x = exp(-∫_x^{x+T} μ)`.
    pub fn survival_probability(&self, x: f64, horizon: f64) -> f64 {
        (-self.integrated_hazard(x, horizon)).exp()
    }
}

const C_MIN: f64 = 1e-4;
const C_MAX: f64 = 0.5;
const COARSE_POINTS: usize = 200;

/// Least-squares fit of `a + b e^{c·age}` to hazard observations inside
/// `window`, subject to `b >= 0` and `a + b >= 0` (nonnegative hazard at
/// every age >= 0).
pub fn fit_gompertz_makeham(obs: &[(f64, f64)], window: FitWindow) -> Result<GompertzMakehamFit> {
    let (ages, rates): (Vec<f64>, Vec<f64>) = obs
        .iter()
        .filter(|(age, _)| *age >= window.lo && *age <= window.hi)
        .copied()
        .unzip();
    if ages.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 observations in [{}, {}], found {}",
            window.lo,
            window.hi,
            ages.len()
        )));
    }
    if rates.iter().all(|r| *r == 0.0) {
        return Err(Error::Fit("all observed rates are zero".into()));
    }
    if rates.iter().any(|r| !r.is_finite()) {
        return Err(Error::Fit("observed rates must be finite".into()));
    }

    let profile = |c: f64| profile_linear(&ages, &rates, c);

    let step = (C_MAX - C_MIN) / (COARSE_POINTS - 1) as f64;
    let grid_c = |i: usize| C_MIN + i as f64 * step;
    let best = (0..COARSE_POINTS)
        .map(|i| (i, profile(grid_c(i)).2))
        .filter(|(_, sse)| sse.is_finite())
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Fit("no finite residual on the slope grid".into()))?;

    let lo = grid_c(best.saturating_sub(1));
    let hi = grid_c((best + 1).min(COARSE_POINTS - 1));
    let refined = golden_section(|c| profile(c).2, lo, hi);

    let c = if profile(refined).2 <= profile(grid_c(best)).2 {
        refined
    } else {
        grid_c(best)
    };
    let (a, b, residual) = profile(c);
    Ok(GompertzMakehamFit {
        a,
        b,
        c,
        fit_window: window,
        residual,
    })
}

/// Constrained least squares in `(a, b)` for fixed `c`. Returns
/// `(a, b, sse)`.
fn profile_linear(ages: &[f64], rates: &[f64], c: f64) -> (f64, f64, f64) {
    let z: Vec<f64> = ages.iter().map(|x| (c * x).exp()).collect();
    let n = z.len() as f64;
    let sse = |a: f64, b: f64| -> f64 {
        z.iter()
            .zip(rates)
            .map(|(zi, yi)| {
                let e = a + b * zi - yi;
                e * e
            })
            .sum()
    };

    let z_mean = z.iter().sum::<f64>() / n;
    let y_mean = rates.iter().sum::<f64>() / n;
    let sxx: f64 = z.iter().map(|zi| (zi - z_mean).powi(2)).sum();
    let sxy: f64 = z
        .iter()
        .zip(rates)
        .map(|(zi, yi)| (zi - z_mean) * (yi - y_mean))
        .sum();
    if sxx > 0.0 {
        let b = sxy / sxx;
        let a = y_mean - b * z_mean;
        if b >= 0.0 && a + b >= 0.0 {
            return (a, b, sse(a, b));
        }
    }

    // The optimum sits on the boundary of {b >= 0, a + b >= 0}.
    let mut candidates = vec![(y_mean.max(0.0), 0.0), (0.0, 0.0)];
    let szz: f64 = z.iter().map(|zi| (zi - 1.0).powi(2)).sum();
    if szz > 0.0 {
        let b = z
            .iter()
            .zip(rates)
            .map(|(zi, yi)| yi * (zi - 1.0))
            .sum::<f64>()
            / szz;
        if b >= 0.0 {
            candidates.push((-b, b));
        }
    }
    candidates
        .into_iter()
        .map(|(a, b)| (a, b, sse(a, b)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("nonempty")
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.abs().max(1e-300) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bundled_table_matches_source() {
        let t = MortalityTable::bundled();
        assert_eq!(t.rows().len(), 19);
        let at = |age: f64| t.rows().iter().find(|r| r.age == age).unwrap().deaths_total;
        assert_eq!(at(64.0), 1232.0);
        assert_eq!(at(89.0), 21522.0);
        assert_eq!(at(90.0), 46139.0);
        let r = t.rows()[0];
        assert_eq!(
            (r.age, r.deaths_men, r.deaths_women, r.deaths_total),
            (4.0, 50.0, 45.0, 95.0)
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            load_mortality_table(""),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_mortality_table("age,men,women,total\n"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            load_mortality_table("age,male,female,total\n1,2,3,4\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = "age,men,women,total\n4,1,1,2\n9,x,1,2\n";
        match load_mortality_table(bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("men"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let short = "age,men,women,total\n4,1,1\n";
        assert!(matches!(
            load_mortality_table(short),
            Err(Error::Parse { line: 2, .. })
        ));
        let negative = "age,men,women,total\n4,1,1,-2\n";
        assert!(matches!(
            load_mortality_table(negative),
            Err(Error::Parse { line: 2, .. })
        ));
        let unordered = "age,men,women,total\n9,1,1,2\n4,1,1,2\n";
        assert!(matches!(
            load_mortality_table(unordered),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn hazard_observations() {
        let obs = empirical_hazard(&MortalityTable::bundled());
        assert!(obs.contains(&(64.0, 0.01232)));
        assert!(obs.contains(&(9.0, 0.00009)));
        let zero = load_mortality_table("age,men,women,total\n1,0,0,0\n").unwrap();
        assert_eq!(empirical_hazard(&zero), vec![(1.0, 0.0)]);
    }

    #[test]
    fn hazard_and_survival_closed_forms() {
        let flat = GompertzMakehamFit::from_params(0.02, 0.0, 0.1).unwrap();
        assert_eq!(flat.hazard(55.0), 0.02);
        assert_relative_eq!(
            flat.survival_probability(40.0, 7.0),
            (-0.14f64).exp(),
            max_relative = 1e-15
        );

        let gm = GompertzMakehamFit::from_params(5e-4, 2e-5, 0.1).unwrap();
        assert_eq!(gm.hazard(0.0), 5e-4 + 2e-5);
        assert_relative_eq!(
            gm.hazard(70.0),
            0.022_432_663_168_569_17,
            max_relative = 1e-14
        );
        assert_eq!(gm.survival_probability(30.0, 0.0), 1.0);
        assert!(gm.survival_probability(30.0, 10.0) > gm.survival_probability(30.0, 11.0));
    }

    #[test]
    fn parameter_guards() {
        assert!(GompertzMakehamFit::from_params(0.0, 1e-5, 0.0).is_err());
        assert!(GompertzMakehamFit::from_params(0.0, -1e-5, 0.1).is_err());
        assert!(GompertzMakehamFit::from_params(-1e-3, 1e-5, 0.1).is_err());
    }

    #[test]
    fn fit_rejects_thin_or_empty_data() {
        let few = [(30.0, 0.001), (40.0, 0.002), (50.0, 0.004)];
        assert!(matches!(
            fit_gompertz_makeham(&few, FitWindow::default()),
            Err(Error::Fit(_))
        ));
        let zeros: Vec<(f64, f64)> = (30..40).map(|a| (a as f64, 0.0)).collect();
        assert!(matches!(
            fit_gompertz_makeham(&zeros, FitWindow::default()),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn fit_recovers_synthetic_law() {
        let truth = GompertzMakehamFit::from_params(5e-4, 2e-5, 0.1).unwrap();
        let obs: Vec<(f64, f64)> = (30..=80)
            .map(|a| (a as f64, truth.hazard(a as f64)))
            .collect();
        let fit = fit_gompertz_makeham(&obs, FitWindow { lo: 30.0, hi: 80.0 }).unwrap();
        assert_relative_eq!(fit.a, 5e-4, max_relative = 1e-3);
        assert_relative_eq!(fit.b, 2e-5, max_relative = 1e-3);
        assert_relative_eq!(fit.c, 0.1, max_relative = 1e-3);
    }

    #[test]
    fn fit_on_bundled_table() {
        let obs = empirical_hazard(&MortalityTable::bundled());
        let fit = fit_gompertz_makeham(&obs, FitWindow::default()).unwrap();
        assert!(fit.b > 0.0 && fit.c > 0.0);
        for age in 0..=110 {
            assert!(fit.hazard(age as f64) >= 0.0);
        }
        for age in 30..90 {
            assert!(fit.hazard(age as f64 + 1.0) > fit.hazard(age as f64));
        }
        let again = fit_gompertz_makeham(&obs, FitWindow::default()).unwrap();
        assert_eq!(fit, again);
    }
}
