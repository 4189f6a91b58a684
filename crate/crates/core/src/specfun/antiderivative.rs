//! Closed-form antiderivative of `z^p K0(2 sqrt z)`:
//!
//! ```text
//! F(z) = z^(p+1)   K0(2 sqrt z) 1F2(1; p+1, p+2; z) / (p+1)
//!      + z^(p+3/2) K1(2 sqrt z) 1F2(1; p+2, p+2; z) / (p+1)^2
//! ```
//!
//! normalized so that `F(0) = 0`. Both terms are positive for `z > 0`.
//! Each is assembled in log space from the scaled Bessel values and the
//! scaled series, so nothing overflows even when `2 sqrt z` is in the
//! hundreds.

use super::{bessel_k, bessel_k01_scaled, hyp1f2_scaled, reliable_digits, SeriesControl};
use crate::{Error, Result};

/// Minimum number of trustworthy significant digits before a result is
/// reported as an accuracy loss.
pub(crate) const MIN_RELIABLE_DIGITS: f64 = 6.0;

/// Relative error budget of one Bessel-times-series product.
pub(crate) const PRODUCT_UNIT_ERR: f64 = 1e-13;

/// The two terms of the antiderivative, kept apart so callers can monitor
/// cancellation when combining several of them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AntiderivativeParts {
    pub k0_term: f64,
    pub k1_term: f64,
}

impl AntiderivativeParts {
    pub fn total(&self) -> f64 {
        self.k0_term + self.k1_term
    }
}

fn check_args(p: f64, z: f64) -> Result<()> {
    // The antiderivative with F(0) = 0 holds for every p > -1 (the integrand
    // is integrable at the origin); p = m - 1 = 0 is needed for Rayleigh.
    if !(p > -1.0) || !p.is_finite() {
        return Err(Error::domain("zpk0_antiderivative", format!("p must be > -1, got {p}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(
            "zpk0_antiderivative",
            format!("z must be finite and >= 0, got {z}"),
        ));
    }
    Ok(())
}

pub fn zpk0_antiderivative_parts(
    p: f64,
    z: f64,
    ctrl: &SeriesControl,
) -> Result<AntiderivativeParts> {
    check_args(p, z)?;
    if z == 0.0 {
        return Ok(AntiderivativeParts::default());
    }
    let x = 2.0 * z.sqrt();
    let ln_z = z.ln();
    let (k0s, k1s) = bessel_k01_scaled(x)?;
    let s0 = hyp1f2_scaled(p + 1.0, p + 2.0, z, ctrl)?;
    let s1 = hyp1f2_scaled(p + 2.0, p + 2.0, z, ctrl)?;
    let p1 = p + 1.0;

    let k0_term = k0s * s0.mantissa / p1 * (p1 * ln_z - x + s0.ln_scale).exp();
    let k1_term = k1s * s1.mantissa / (p1 * p1) * ((p + 1.5) * ln_z - x + s1.ln_scale).exp();
    Ok(AntiderivativeParts { k0_term, k1_term })
}

/// `F(z)` with `F(0) = 0`; see the module docs.
pub fn zpk0_antiderivative(p: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    let parts = zpk0_antiderivative_parts(p, z, ctrl)?;
    let digits = reliable_digits(&[parts.k0_term, parts.k1_term], PRODUCT_UNIT_ERR);
    if digits < MIN_RELIABLE_DIGITS {
        return Err(Error::AccuracyLoss { digits });
    }
    Ok(parts.total())
}

/// `z^p K_t(2 sqrt z)` for `t` in {0, 1}, taking the limit 0 at `z = 0`
/// where that limit exists.
pub fn zpk_t(p: f64, order: u32, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::domain("zpk_t", format!("z must be >= 0, got {z}")));
    }
    if z == 0.0 {
        // K0 ~ -ln, K1 ~ 1/(2 sqrt z) near the origin
        let vanishes = match order {
            0 => p > 0.0,
            1 => p > 0.5,
            _ => false,
        };
        return if vanishes {
            Ok(0.0)
        } else {
            Err(Error::domain("zpk_t", format!("no finite limit at 0 for p = {p}, t = {order}")))
        };
    }
    let x = 2.0 * z.sqrt();
    let ks = bessel_k(order, x, true)?;
    Ok(ks * (p * z.ln() - x).exp())
}
