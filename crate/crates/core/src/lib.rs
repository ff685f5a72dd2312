// NaN inputs must fail the parameter checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Monte Carlo pricing of unit-linked life insurance under a Vasicek short
//! rate and a Heston stock written in forward-variance form, with a
//! Black-Scholes closed-form baseline and Gompertz-Makeham mortality.

pub mod cli;
pub mod error;
pub mod market_models;
pub mod mc_engine;
pub mod measure_change;
pub mod mortality;
pub mod pricing;
pub mod quadrature;

pub use error::{Error, Result};
