//! Error-probability evaluators.
//!
//! Every evaluator approximates the same average block error
//!
//! ```text
//! eps = E[ Q( (C(mu z) - r) / sqrt(V(mu z) / n) ) ],   z = h~ g~,
//! ```
//!
//! by a different route: sampling, adaptive quadrature of the exact or the
//! piecewise-linear integrand, the closed-form antiderivative expression,
//! and two baselines (infinite blocklength outage, fixed transmit power).

mod baselines;
mod closed_form;
mod linearized;
mod monte_carlo;
mod quadrature;

pub use baselines::{eps_fixed_power, eps_outage_asymptotic, fixed_power_components, FixedPowerComponents};
pub use closed_form::{closed_form_terms, eps_closed_form};
pub use linearized::{linearization_params, omega, LinearizedQParams};
pub use monte_carlo::{eps_monte_carlo, MC_BLOCK};
pub use quadrature::{eps_quadrature, Integrand};

use crate::model::{awgn_normal_terms, BlockAllocation, ErrorProbEstimate, SystemParams};
use crate::specfun::gauss_q;
use crate::Result;

/// Deterministic evaluators usable inside optimization loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Evaluator {
    #[default]
    ClosedForm,
    QuadratureExact,
    QuadratureLinearized,
    Asymptotic,
}

impl Evaluator {
    pub fn evaluate(&self, params: &SystemParams, alloc: &BlockAllocation) -> Result<ErrorProbEstimate> {
        match self {
            Evaluator::ClosedForm => eps_closed_form(params, alloc),
            Evaluator::QuadratureExact => eps_quadrature(params, alloc, Integrand::ExactQ, DEFAULT_QUAD_TOL),
            Evaluator::QuadratureLinearized => {
                eps_quadrature(params, alloc, Integrand::Linearized, DEFAULT_QUAD_TOL)
            }
            Evaluator::Asymptotic => eps_outage_asymptotic(params, alloc),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Evaluator::ClosedForm => "closed_form",
            Evaluator::QuadratureExact => "quadrature_exact",
            Evaluator::QuadratureLinearized => "quadrature_linearized",
            Evaluator::Asymptotic => "asymptotic",
        }
    }
}

impl std::str::FromStr for Evaluator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(Evaluator::ClosedForm),
            "quadrature_exact" | "exact_q" => Ok(Evaluator::QuadratureExact),
            "quadrature_linearized" | "linearized" => Ok(Evaluator::QuadratureLinearized),
            "asymptotic" => Ok(Evaluator::Asymptotic),
            other => Err(crate::Error::invalid("evaluator", format!("unknown tag {other:?}"))),
        }
    }
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;

/// `Q((C(gamma) - r) / sqrt(V(gamma) / n))`, with the zero-dispersion point
/// `gamma = 0` mapped to its limit.
pub fn normal_approx_error(gamma: f64, rate: f64, n: f64) -> f64 {
    let (c, v) = awgn_normal_terms(gamma);
    if v == 0.0 {
        return if rate > 0.0 { 1.0 } else { 0.5 };
    }
    gauss_q((c - rate) / (v / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dispersion_guard() {
        assert_eq!(normal_approx_error(0.0, 0.5, 300.0), 1.0);
        assert_eq!(normal_approx_error(0.0, 0.0, 300.0), 0.5);
        assert!(normal_approx_error(1e-300, 0.5, 300.0) > 0.999);
    }

    #[test]
    fn evaluator_tags_round_trip() {
        for e in [
            Evaluator::ClosedForm,
            Evaluator::QuadratureExact,
            Evaluator::QuadratureLinearized,
            Evaluator::Asymptotic,
        ] {
            assert_eq!(e.as_str().parse::<Evaluator>().unwrap(), e);
        }
        assert!("monte_carlo".parse::<Evaluator>().is_err());
    }
}
