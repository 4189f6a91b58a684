//! Finite-blocklength error probability of a wireless-powered uplink.
//!
//! A destination node charges an energy-limited source over `v` channel uses
//! (WET phase); the source then spends the harvested energy sending `k` bits
//! over `n` channel uses (WIT phase). Both hops see independent quasi-static
//! Nakagami-m fading. This crate evaluates the average block error
//! probability under the normal approximation with several independent
//! methods and searches for the blocklength split that meets a reliability
//! target with the least total delay.
//!
//! Module map:
//!
//! - [`specfun`]: Bessel K, `1F2`, Gaussian Q, incomplete gamma, gamma
//!   sampling and the antiderivative of `z^p K0(2 sqrt z)`.
//! - [`model`]: link parameters, SNR scaling, product-of-gammas density.
//! - [`evaluators`]: Monte Carlo, quadrature, closed-form and baseline
//!   estimators of the error probability.
//! - [`optimizer`]: minimum WET blocklength, minimum delay, minimum error at
//!   fixed delay, fixed-power baseline optimum.
//! - [`quad`] and [`rng`]: numerical plumbing shared by the above.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluators;
pub mod model;
pub mod optimizer;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
pub use evaluators::{
    eps_closed_form, eps_fixed_power, eps_monte_carlo, eps_outage_asymptotic, eps_quadrature,
    linearization_params, omega, Evaluator, Integrand, LinearizedQParams,
};
pub use model::{
    allocation_metrics, awgn_normal_terms, energy_budget, mu_factor, product_pdf,
    AllocationMetrics, BlockAllocation, ErrorProbEstimate, Method, SystemParams,
};
pub use optimizer::{
    best_fixed_power, min_delay, min_error_given_delay, min_wet_blocklength, DelaySearch,
    FixedPowerResult, MinErrorResult, OptimizationResult, WetSearch,
};
pub use rng::RandomStream;
pub use specfun::SeriesControl;
