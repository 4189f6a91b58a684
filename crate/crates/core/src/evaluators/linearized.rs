use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::model::{mu_factor, BlockAllocation, SystemParams};
use crate::specfun::gamma_fn;
use crate::Result;

/// Constants of the piecewise-linear surrogate for the Q-function and the
/// weights that appear when it is integrated against the product density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedQParams {
    pub mu: f64,
    /// SNR at which the surrogate crosses 1/2: `2^r - 1`.
    pub theta: f64,
    /// Slope factor `sqrt(n / 2pi) (2^(2r) - 1)^(-1/2)`.
    pub beta: f64,
    /// Lower SNR knee `theta - sqrt(pi/2) / beta`.
    pub varrho: f64,
    /// Upper SNR knee `theta + sqrt(pi/2) / beta`.
    pub vartheta: f64,
    /// Lower knee in `z`, clamped at 0.
    pub zeta2: f64,
    /// Upper knee in `z`.
    pub xi2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    /// Set when `varrho < 0` and `zeta2` was clamped.
    pub clamped: bool,
    pub m: f64,
}

impl LinearizedQParams {
    /// True when the rate is so far beyond reach that `2^r` overflows.
    pub fn saturated(&self) -> bool {
        !self.theta.is_finite()
    }
}

pub fn linearization_params(params: &SystemParams, alloc: &BlockAllocation) -> Result<LinearizedQParams> {
    params.validate()?;
    let n = alloc.n() as f64;
    let rate = alloc.rate();
    let mu = mu_factor(params, alloc.v(), alloc.n());
    let theta = (rate * LN_2).exp_m1();
    let beta = (n / (2.0 * PI)).sqrt() / (2.0 * rate * LN_2).exp_m1().sqrt();
    let half_width = FRAC_PI_2.sqrt() / beta;
    let varrho = theta - half_width;
    let vartheta = theta + half_width;
    let clamped = varrho < 0.0;
    let zeta2 = varrho.max(0.0) / mu;
    let xi2 = vartheta / mu;
    let g = gamma_fn(params.m);
    let omega1 = 2.0 / (g * g);
    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    let omega2 = beta * mu * inv_sqrt_2pi * omega1;
    let omega3 = (0.5 + beta * theta * inv_sqrt_2pi) * omega1;
    Ok(LinearizedQParams {
        mu,
        theta,
        beta,
        varrho,
        vartheta,
        zeta2,
        xi2,
        omega1,
        omega2,
        omega3,
        clamped,
        m: params.m,
    })
}

/// Piecewise-linear surrogate of the per-realization error probability.
pub fn omega(z: f64, qp: &LinearizedQParams) -> f64 {
    if qp.saturated() {
        return 1.0;
    }
    if z <= qp.zeta2 && !qp.clamped {
        return 1.0;
    }
    if z >= qp.xi2 {
        return 0.0;
    }
    let v = 0.5 - qp.beta / (2.0 * PI).sqrt() * (qp.mu * z - qp.theta);
    v.clamp(0.0, 1.0)
}
