//! Two reference schemes: infinite-blocklength outage and a source that
//! transmits at a fixed power whenever it harvested enough energy.

use std::f64::consts::LN_2;

use super::linearization_params;
use super::normal_approx_error;
use super::DEFAULT_QUAD_TOL;
use crate::model::{BlockAllocation, ErrorProbEstimate, Method, SystemParams};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{ln_gamma, regularized_gamma_p, zpk0_antiderivative, SeriesControl};
use crate::{Error, Result};

/// `P[C(mu z) < r]`, the outage probability when the blocklength is
/// unbounded.
pub fn eps_outage_asymptotic(params: &SystemParams, alloc: &BlockAllocation) -> Result<ErrorProbEstimate> {
    let qp = linearization_params(params, alloc)?;
    if qp.saturated() {
        return Ok(ErrorProbEstimate::new(1.0, Method::Asymptotic, 0.0));
    }
    let threshold = qp.theta / qp.mu;
    let cdf = qp.omega1 * zpk0_antiderivative(params.m - 1.0, threshold, &SeriesControl::default())?;
    Ok(ErrorProbEstimate::new(cdf, Method::Asymptotic, cdf.abs() * 1e-13))
}

/// The two events that make up the fixed-power error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPowerComponents {
    /// Probability that the harvested energy cannot sustain `p_hat` for
    /// `n` channel uses.
    pub energy_outage: f64,
    /// Decoding error with power `p_hat`, averaged over the uplink fading.
    pub decode_error: f64,
    pub quad_err: f64,
}

impl FixedPowerComponents {
    pub fn total(&self) -> f64 {
        self.energy_outage + (1.0 - self.energy_outage) * self.decode_error
    }
}

pub fn fixed_power_components(
    params: &SystemParams,
    alloc: &BlockAllocation,
    p_hat: f64,
) -> Result<FixedPowerComponents> {
    params.validate()?;
    if !(p_hat > 0.0) || !p_hat.is_finite() {
        return Err(Error::invalid("p_hat", format!("must be finite and > 0, got {p_hat}")));
    }
    let m = params.m;
    let pl = params.path_loss();
    let v = alloc.v() as f64;
    let n = alloc.n() as f64;

    // E < p_hat n T_c  <=>  h^2 < p_hat n pl / (eta P_D v), and h~ = m h^2
    let h_threshold = m * p_hat * n * pl / (params.eta * params.p_d * v);
    let energy_outage = regularized_gamma_p(m, h_threshold)?;

    // gamma_hat = c g^2, g^2 ~ Gamma(m, 1/m); integrate in u = sqrt(g^2)
    let c = p_hat / (pl * params.sigma2_d);
    let rate = alloc.rate();
    let ln_norm = m * m.ln() - ln_gamma(m);
    let density_u = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        // 2 u f(u^2) = 2 m^m / Gamma(m) u^(2m-1) e^(-m u^2)
        (LN_2 + ln_norm + (2.0 * m - 1.0) * u.ln() - m * u * u).exp()
    };
    let f = |u: f64| normal_approx_error(c * u * u, rate, n) * density_u(u);
    let theta = (rate * LN_2).exp_m1();
    let mut pts = vec![0.0];
    if theta.is_finite() {
        let u0 = (theta / c).sqrt();
        for s in [0.5, 1.0, 2.0] {
            let u = s * u0;
            if u > *pts.last().unwrap() && u.is_finite() {
                pts.push(u);
            }
        }
    }
    // g^2 beyond ~ (m + 40 sqrt m) / m carries no mass
    let u_max = ((m + 40.0 * m.sqrt() + 40.0) / m).sqrt();
    if u_max > *pts.last().unwrap() {
        pts.push(u_max);
    }
    let opts = QuadOptions {
        rel_tol: DEFAULT_QUAD_TOL,
        abs_tol: 1e-300,
        ..QuadOptions::default()
    };
    let r = integrate(f, &pts, &opts);
    if !r.converged {
        return Err(Error::Quadrature {
            value: r.value,
            abs_err: r.abs_err,
        });
    }
    Ok(FixedPowerComponents {
        energy_outage,
        decode_error: r.value.clamp(0.0, 1.0),
        quad_err: r.abs_err,
    })
}

/// Error probability when the source always transmits at `p_hat` watts and
/// stays silent (counted as an error) if its battery falls short.
pub fn eps_fixed_power(params: &SystemParams, alloc: &BlockAllocation, p_hat: f64) -> Result<ErrorProbEstimate> {
    let c = fixed_power_components(params, alloc, p_hat)?;
    Ok(ErrorProbEstimate::new(c.total(), Method::FixedPower, c.quad_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_outage_vanishes() {
        let p = SystemParams::reference();
        let a = BlockAllocation::new(1000, 1_000_000, 1).unwrap();
        assert!(eps_outage_asymptotic(&p, &a).unwrap().value < 1e-9);
    }

    #[test]
    fn fixed_power_limits() {
        let p = SystemParams::reference();
        let a = BlockAllocation::new(2000, 300, 216).unwrap();
        let tiny = fixed_power_components(&p, &a, 1e-15).unwrap();
        assert!(tiny.energy_outage < 1e-12);
        assert!(tiny.decode_error > 1.0 - 1e-9);
        let huge = eps_fixed_power(&p, &a, 10.0).unwrap();
        assert!(huge.value > 1.0 - 1e-12);
        let mid = eps_fixed_power(&p, &a, 1e-7).unwrap();
        assert!(mid.value < 0.5, "{mid:?}");
        assert!(eps_fixed_power(&p, &a, 0.0).is_err());
    }

    #[test]
    fn decode_error_of_deterministic_channel() {
        // m large concentrates g^2 at 1: decode error -> Q at the mean SNR
        let p = SystemParams::reference().with_m(400.0);
        let a = BlockAllocation::new(2000, 300, 216).unwrap();
        let p_hat = 1e-7;
        let c = fixed_power_components(&p, &a, p_hat).unwrap();
        let snr = p_hat / (p.path_loss() * p.sigma2_d);
        let point = normal_approx_error(snr, a.rate(), 300.0);
        assert!((c.decode_error - point).abs() < 0.05 * point.max(1e-3), "{c:?} vs {point}");
    }
}
