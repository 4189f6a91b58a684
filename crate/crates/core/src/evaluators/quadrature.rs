//! Adaptive quadrature of the error-probability integral.
//!
//! Integration runs in `q = 2 sqrt z`, where the product density becomes
//! `omega1 (q/2)^(2m-1) K0(q)`. That removes the `z^(m-1)` blow-up at the
//! origin for `m < 1`, leaving at worst a logarithmic endpoint singularity.

use super::linearized::{linearization_params, omega, LinearizedQParams};
use super::normal_approx_error;
use crate::model::{BlockAllocation, ErrorProbEstimate, Method, SystemParams};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::bessel_k;
use crate::{Error, Result};

/// Which per-realization error function is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrand {
    /// The Q-function of the normal approximation.
    ExactQ,
    /// The piecewise-linear surrogate.
    Linearized,
}

const ABS_FLOOR: f64 = 1e-300;

/// `f_Z(q^2/4) * dz/dq`.
pub(crate) fn density_in_q(q: f64, m: f64, ln_omega1: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let Ok(k0s) = bessel_k(0, q, true) else {
        return 0.0;
    };
    let half = 0.5 * q;
    (ln_omega1 + (2.0 * m - 1.0) * half.ln() - q).exp() * k0s
}

pub fn eps_quadrature(
    params: &SystemParams,
    alloc: &BlockAllocation,
    integrand: Integrand,
    tol: f64,
) -> Result<ErrorProbEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let qp = linearization_params(params, alloc)?;
    let method = match integrand {
        Integrand::ExactQ => Method::QuadratureExact,
        Integrand::Linearized => Method::QuadratureLinearized,
    };
    if qp.saturated() {
        return Ok(ErrorProbEstimate::new(1.0, method, 0.0));
    }
    let opts = QuadOptions {
        rel_tol: tol,
        abs_tol: ABS_FLOOR,
        ..QuadOptions::default()
    };
    let ln_omega1 = qp.omega1.ln();
    let m = params.m;
    let result = match integrand {
        Integrand::ExactQ => {
            let rate = alloc.rate();
            let n = alloc.n() as f64;
            let mu = qp.mu;
            let f = |q: f64| {
                let z = 0.25 * q * q;
                normal_approx_error(mu * z, rate, n) * density_in_q(q, m, ln_omega1)
            };
            integrate(f, &exact_breakpoints(&qp), &opts)
        }
        Integrand::Linearized => {
            let f = |q: f64| omega(0.25 * q * q, &qp) * density_in_q(q, m, ln_omega1);
            let mut pts = vec![0.0];
            if qp.zeta2 > 0.0 {
                pts.push(2.0 * qp.zeta2.sqrt());
            }
            pts.push(2.0 * qp.xi2.sqrt());
            integrate(f, &pts, &opts)
        }
    };
    if !result.converged {
        return Err(Error::Quadrature {
            value: result.value,
            abs_err: result.abs_err,
        });
    }
    Ok(ErrorProbEstimate::new(result.value, method, result.abs_err))
}

fn exact_breakpoints(qp: &LinearizedQParams) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut push = |z: f64| {
        let q = 2.0 * z.sqrt();
        if q > *pts.last().expect("non-empty") && q.is_finite() {
            pts.push(q);
        }
    };
    push(qp.zeta2);
    push(qp.theta / qp.mu);
    push(qp.xi2);
    push(4.0 * qp.xi2);
    pts.push(f64::INFINITY);
    pts
}
