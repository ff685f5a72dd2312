//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for input or configuration errors, 3 for
//! numerical failures.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_compare_models, cmd_distribution, cmd_fit_mortality, cmd_premiums, cmd_price_surface,
    qq_pairs,
};
pub use config::{McConfig, MortalityConfig, Overrides, PolicyConfig, PolicyKind, RunConfig};
pub use report::{EmittedFile, ReportBundle};

use crate::error::{Error, Result};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "unitlinked",
    version,
    about = "Unit-linked endowment pricing under Vasicek-Heston and Black-Scholes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master RNG seed.
    #[arg(long, global = true, env = "UNITLINKED_SEED")]
    pub seed: Option<u64>,

    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Euler steps per year.
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Use the literal Black-Scholes death-benefit formula instead of the reserve form.
    #[arg(long, global = true)]
    pub strict_paper: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the Gompertz-Makeham hazard to a mortality table.
    FitMortality {
        /// CSV with header age,men,women,total.
        table: Option<PathBuf>,
    },
    /// Survival-free endowment values, Black-Scholes vs Vasicek-Heston.
    CompareModels,
    /// Pure-endowment premium surfaces over age and guarantee.
    PriceSurface,
    /// Discounted payoff samples and normal QQ data.
    Distribution,
    /// Single and yearly premiums per maturity.
    Premiums {
        #[arg(long, value_enum)]
        policy: Option<PolicyKind>,
    },
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let policy = match &self.command {
            Command::Premiums { policy } => *policy,
            _ => None,
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            paths: self.paths,
            steps: self.steps,
            out: self.out.clone(),
            strict_paper: self.strict_paper,
            policy,
        });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run(&self) -> Result<ReportBundle> {
        let cfg = self.resolve_config()?;
        match &self.command {
            Command::FitMortality { table } => cmd_fit_mortality(&cfg, table.as_deref()),
            Command::CompareModels => cmd_compare_models(&cfg),
            Command::PriceSurface => cmd_price_surface(&cfg),
            Command::Distribution => cmd_distribution(&cfg),
            Command::Premiums { .. } => cmd_premiums(&cfg),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match cli.run() {
        Ok(bundle) => {
            for f in &bundle.files {
                println!("{}  {}", f.sha256, bundle.dir.join(&f.name).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
