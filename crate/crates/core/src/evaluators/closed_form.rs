//! Closed-form error probability under the piecewise-linear surrogate.
//!
//! With `G = F_{m-1}` and `H = F_m` the antiderivatives of
//! `z^(m-1) K0(2 sqrt z)` and `z^m K0(2 sqrt z)`,
//!
//! ```text
//! eps = (w1 - w3) G(zeta^2) + w2 H(zeta^2) + w3 G(xi^2) - w2 H(xi^2).
//! ```
//!
//! Each antiderivative contributes a `K0` and a `K1` product, so the result
//! is a signed sum of eight terms. The sum is monitored for cancellation;
//! when fewer than six digits survive, the value is recomputed by
//! quadrature of the same surrogate and the estimate is marked as a
//! fallback.

use super::linearized::{linearization_params, LinearizedQParams};
use super::quadrature::{eps_quadrature, Integrand};
use super::DEFAULT_QUAD_TOL;
use crate::model::{BlockAllocation, ErrorProbEstimate, Method, SystemParams};
use crate::specfun::{
    reliable_digits, zpk0_antiderivative_parts, CompensatedSum, SeriesControl, MIN_RELIABLE_DIGITS,
    PRODUCT_UNIT_ERR,
};
use crate::{Error, Result};

/// The eight signed products whose sum is the closed-form value, ordered as
/// `zeta` terms first, then `xi` terms.
pub fn closed_form_terms(qp: &LinearizedQParams, ctrl: &SeriesControl) -> Result<[f64; 8]> {
    let p = qp.m - 1.0;
    let g_zeta = zpk0_antiderivative_parts(p, qp.zeta2, ctrl)?;
    let h_zeta = zpk0_antiderivative_parts(p + 1.0, qp.zeta2, ctrl)?;
    let g_xi = zpk0_antiderivative_parts(p, qp.xi2, ctrl)?;
    let h_xi = zpk0_antiderivative_parts(p + 1.0, qp.xi2, ctrl)?;
    let w13 = qp.omega1 - qp.omega3;
    Ok([
        w13 * g_zeta.k0_term,
        w13 * g_zeta.k1_term,
        qp.omega2 * h_zeta.k0_term,
        qp.omega2 * h_zeta.k1_term,
        qp.omega3 * g_xi.k0_term,
        qp.omega3 * g_xi.k1_term,
        -qp.omega2 * h_xi.k0_term,
        -qp.omega2 * h_xi.k1_term,
    ])
}

fn direct(qp: &LinearizedQParams) -> Result<(f64, f64)> {
    let terms = closed_form_terms(qp, &SeriesControl::default())?;
    let mut acc = CompensatedSum::default();
    for t in terms {
        acc.add(t);
    }
    let value = acc.value();
    let digits = reliable_digits(&terms, PRODUCT_UNIT_ERR);
    if digits < MIN_RELIABLE_DIGITS {
        return Err(Error::AccuracyLoss { digits });
    }
    let uncertainty = value.abs() * 10f64.powf(-digits.min(16.0));
    Ok((value, uncertainty))
}

pub fn eps_closed_form(params: &SystemParams, alloc: &BlockAllocation) -> Result<ErrorProbEstimate> {
    let qp = linearization_params(params, alloc)?;
    if qp.saturated() {
        return Ok(ErrorProbEstimate::new(1.0, Method::ClosedForm, 0.0));
    }
    match direct(&qp) {
        Ok((value, unc)) => Ok(ErrorProbEstimate::new(value, Method::ClosedForm, unc)),
        Err(_) => {
            let q = eps_quadrature(params, alloc, Integrand::Linearized, DEFAULT_QUAD_TOL)?;
            Ok(ErrorProbEstimate {
                method: Method::ClosedForm,
                fallback_used: true,
                ..q
            })
        }
    }
}
