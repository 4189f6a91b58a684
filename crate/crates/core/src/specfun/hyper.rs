//! `1F2(1; b1, b2; z)` for nonnegative `z`.

use super::{CompensatedSum, SeriesControl};
use crate::{Error, Result};

const RESCALE_THRESHOLD: f64 = 1e250;

/// A positive quantity stored as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl ScaledValue {
    pub fn value(&self) -> f64 {
        if self.ln_scale == 0.0 {
            self.mantissa
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.ln_scale
    }
}

/// `sum_j z^j / ((b1)_j (b2)_j)`.
///
/// May overflow to infinity for very large `z`; use [`hyp1f2_scaled`] when
/// the result feeds an exponentially small factor.
pub fn hyp1f2(b1: f64, b2: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    hyp1f2_scaled(b1, b2, z, ctrl).map(|s| s.value())
}

/// Same series as [`hyp1f2`], with the magnitude carried separately so the
/// partial sums never overflow.
pub fn hyp1f2_scaled(b1: f64, b2: f64, z: f64, ctrl: &SeriesControl) -> Result<ScaledValue> {
    if !(b1 > 0.0) || !(b2 > 0.0) || !b1.is_finite() || !b2.is_finite() {
        return Err(Error::domain(
            "hyp1f2",
            format!("lower parameters must be positive, got ({b1}, {b2})"),
        ));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain("hyp1f2", format!("z must be finite and >= 0, got {z}")));
    }

    let mut acc = CompensatedSum::default();
    let mut term = 1.0;
    let mut ln_scale = 0.0;
    for j in 0..ctrl.max_terms() {
        acc.add(term);
        let jf = j as f64;
        let ratio = z / ((b1 + jf) * (b2 + jf));
        if ratio < 1.0 {
            let tail_bound = term * ratio / (1.0 - ratio);
            if tail_bound <= ctrl.rel_tol() * acc.value() {
                return Ok(ScaledValue {
                    mantissa: acc.value(),
                    ln_scale,
                });
            }
        }
        term *= ratio;
        if acc.value() > RESCALE_THRESHOLD {
            let f = RESCALE_THRESHOLD.recip();
            acc.scale(f);
            term *= f;
            ln_scale += RESCALE_THRESHOLD.ln();
        }
    }
    Err(Error::NonConvergence {
        terms: ctrl.max_terms(),
        ratio: term / acc.value(),
    })
}
