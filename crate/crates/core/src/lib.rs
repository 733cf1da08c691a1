//! Continued logarithm gcd algorithm and its average-case analysis.
//!
//! - [`numbers`]: exact rationals, dyadic valuation and norm, integer LFT matrices.
//! - [`cl`]: the algorithm, execution traces, CLCF expansions, continuants and costs.
//! - [`dynamics`]: the CL dynamical system, invariant density, orbit averages.
//! - [`spectral`]: collocation discretization of the transfer operator.
//! - [`constants`]: closed-form values of the analysis constants.
//! - [`experiments`]: mean-cost experiments over coprime pairs.
//! - [`cli`]: the command-line front end used by the `contlog` binary.

pub mod cl;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod numbers;
pub mod spectral;

pub use cl::{cf_eval, cl_run, cl_step, continuants, cost_vector, Convention, ExponentSeq, Trace};
pub use error::{Error, Result};
pub use numbers::{Rational, Valuation};
