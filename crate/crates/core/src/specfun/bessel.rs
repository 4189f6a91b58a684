//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Power series below `x = 2`, Steed's continued fraction (CF2) above. The
//! continued fraction produces `e^x K_t(x)` directly, so the scaled pair is
//! the primitive and the unscaled values are derived from it.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 2.0;
const MAX_ITER: usize = 10_000;

/// Order selector for [`bessel_k`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            _ => Err(Error::domain("bessel_k", format!("unsupported order {order}"))),
        }
    }
}

/// `K_order(x)`, or `e^x K_order(x)` when `scaled` is set.
pub fn bessel_k(order: u32, x: f64, scaled: bool) -> Result<f64> {
    let order = BesselOrder::try_from(order)?;
    if !(x > 0.0) {
        return Err(Error::domain("bessel_k", format!("x must be > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (k0, k1) = if x <= SERIES_CUTOFF {
        let (k0, k1) = small_x(x);
        if scaled {
            let e = x.exp();
            (k0 * e, k1 * e)
        } else {
            (k0, k1)
        }
    } else {
        let (k0s, k1s) = steed_cf2_scaled(x);
        if scaled {
            (k0s, k1s)
        } else {
            let e = (-x).exp();
            (k0s * e, k1s * e)
        }
    };
    Ok(match order {
        BesselOrder::Zero => k0,
        BesselOrder::One => k1,
    })
}

/// `(e^x K0(x), e^x K1(x))` for `x > 0`.
pub fn bessel_k01_scaled(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::domain("bessel_k", format!("x must be > 0, got {x}")));
    }
    if x <= SERIES_CUTOFF {
        let (k0, k1) = small_x(x);
        let e = x.exp();
        Ok((k0 * e, k1 * e))
    } else if x.is_infinite() {
        Ok((0.0, 0.0))
    } else {
        Ok(steed_cf2_scaled(x))
    }
}

// K0 = -(ln(x/2) + gamma) I0 + sum y^k/(k!)^2 H_k
// K1 = 1/x + ln(x/2) I1 - (x/4) sum y^k/(k!(k+1)!) (psi(k+1) + psi(k+2))
// with y = x^2/4.
fn small_x(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 1.0;
    let mut k0_tail = 0.0;
    let mut i1_sum = 1.0;
    let mut k1_tail = 2.0 * (-EULER_GAMMA) + 1.0; // psi(1) + psi(2)

    for k in 1..64 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0);
        i0 += t0;
        k0_tail += t0 * harmonic;
        i1_sum += t1;
        k1_tail += t1 * psi_sum;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(ln_half + EULER_GAMMA) * i0 + k0_tail;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * k1_tail;
    (k0, k1)
}

fn steed_cf2_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    h *= a1;
    let k0s = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1s = k0s * (x + 0.5 - h) / x;
    (k0s, k1s)
}
