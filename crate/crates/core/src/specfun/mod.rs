//! Special-function kernel.
//!
//! Everything here is pure and reentrant. The Bessel and `1F2` routines
//! expose scaled forms because the closed-form error expression multiplies
//! exponentially small `K_t(2 sqrt z)` against exponentially large series.

mod antiderivative;
mod bessel;
mod gamma;
mod hyper;
mod normal;

pub use antiderivative::{zpk0_antiderivative, zpk0_antiderivative_parts, zpk_t, AntiderivativeParts};
pub(crate) use antiderivative::{MIN_RELIABLE_DIGITS, PRODUCT_UNIT_ERR};
pub use bessel::{bessel_k, bessel_k01_scaled, BesselOrder};
pub use gamma::{gamma_fn, ln_gamma, regularized_gamma_p, regularized_gamma_q, sample_std_gamma};
pub use hyper::{hyp1f2, hyp1f2_scaled, ScaledValue};
pub use normal::gauss_q;

/// Convergence control for the `1F2` series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> crate::Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(crate::Error::invalid("rel_tol", format!("must be > 0, got {rel_tol}")));
        }
        if max_terms == 0 {
            return Err(crate::Error::invalid("max_terms", "must be >= 1"));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            max_terms: 10_000,
        }
    }
}

/// Neumaier-compensated accumulator that also tracks the sum of magnitudes,
/// so callers can estimate how many digits survive cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub(crate) fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
        self.abs_sum *= factor;
    }
}

/// Significant digits left after summing `terms`, each carrying relative
/// error `unit_err`. Two summation orders are compared as well; the smaller
/// of the two estimates is returned.
pub(crate) fn reliable_digits(terms: &[f64], unit_err: f64) -> f64 {
    let mut fwd = CompensatedSum::default();
    for &t in terms {
        fwd.add(t);
    }
    let rev: f64 = terms.iter().rev().sum();
    let value = fwd.value();
    if value == 0.0 {
        return if fwd.abs_sum() == 0.0 { f64::INFINITY } else { 0.0 };
    }
    let cond = fwd.abs_sum() / value.abs();
    let from_cond = -(cond * unit_err).log10();
    let disagreement = ((rev - value) / value).abs();
    let from_orders = if disagreement > 0.0 {
        -disagreement.log10()
    } else {
        f64::INFINITY
    };
    from_cond.min(from_orders)
}
