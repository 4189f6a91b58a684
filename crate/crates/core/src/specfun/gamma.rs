//! Gamma function helpers, the regularized incomplete gamma function and a
//! standard-gamma sampler.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

const MIN_SHAPE: f64 = 0.5;

pub fn gamma_fn(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        upper_continued_fraction(a, x).map(|q| 1.0 - q)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        lower_series(a, x).map(|p| 1.0 - p)
    } else {
        upper_continued_fraction(a, x)
    }
}

fn check_incomplete_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("regularized_gamma", format!("shape must be > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("regularized_gamma", format!("x must be >= 0, got {x}")));
    }
    Ok(())
}

fn prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            return Ok((sum * prefactor(a, x)).min(1.0));
        }
    }
    Err(Error::NonConvergence {
        terms: 10_000,
        ratio: term / sum,
    })
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok((prefactor(a, x) * h).clamp(0.0, 1.0));
        }
    }
    Err(Error::NonConvergence {
        terms: 10_000,
        ratio: f64::NAN,
    })
}

/// One draw from `Gamma(shape, scale = 1)`.
///
/// Marsaglia-Tsang squeeze for `shape >= 1`; below that the draw is boosted
/// from `shape + 1` by a `U^(1/shape)` factor.
pub fn sample_std_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape >= MIN_SHAPE) || !shape.is_finite() {
        return Err(Error::domain(
            "sample_std_gamma",
            format!("shape must be >= {MIN_SHAPE}, got {shape}"),
        ));
    }
    Ok(sample_unchecked(shape, rng))
}

pub(crate) fn sample_unchecked<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = open01(rng);
        return marsaglia_tsang(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    marsaglia_tsang(shape, rng)
}

fn marsaglia_tsang<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = open01(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
