use std::f64::consts::FRAC_1_SQRT_2;

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn gauss_q(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}
