//! Link parameters and the scalar quantities derived from them.

use std::f64::consts::{LN_2, LOG2_E};

use crate::specfun::{bessel_k, ln_gamma};
use crate::{Error, Result};

/// Physical constants of the S-D link. Powers are in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Nakagami shape, shared by both hops.
    pub m: f64,
    /// RF-to-DC conversion efficiency.
    pub eta: f64,
    /// Transmit power of the destination during WET.
    pub p_d: f64,
    /// Distance in meters.
    pub d: f64,
    /// Path loss exponent.
    pub alpha: f64,
    /// Aggregate attenuation factor (linear).
    pub kappa: f64,
    /// Noise power at the destination.
    pub sigma2_d: f64,
    /// Duration of one channel use in seconds.
    pub t_c: f64,
}

impl SystemParams {
    /// The reference link: m = 3, alpha = 3, d = 12 m, kappa = 1e3,
    /// eta = 0.5, P_D = 30 dBm, sigma^2 = -110 dBm, T_c = 3 us.
    pub fn reference() -> Self {
        Self {
            m: 3.0,
            eta: 0.5,
            p_d: dbm_to_watts(30.0),
            d: 12.0,
            alpha: 3.0,
            kappa: 1e3,
            sigma2_d: dbm_to_watts(-110.0),
            t_c: 3e-6,
        }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.5) || !self.m.is_finite() {
            return Err(Error::invalid("m", format!("Nakagami shape must be >= 0.5, got {}", self.m)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0, 1), got {}", self.eta)));
        }
        let positive = [
            ("p_d", self.p_d),
            ("d", self.d),
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("sigma2_d", self.sigma2_d),
            ("t_c", self.t_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `kappa d^alpha`, the one-hop attenuation.
    pub fn path_loss(&self) -> f64 {
        self.kappa * self.d.powf(self.alpha)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Blocklengths and payload of one WET/WIT round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockAllocation {
    v: u64,
    n: u64,
    k: u64,
}

/// Below this WIT blocklength the normal approximation is outside its
/// usual accuracy regime. Not an error.
pub const MIN_ACCURATE_N: u64 = 100;

impl BlockAllocation {
    pub fn new(v: u64, n: u64, k: u64) -> Result<Self> {
        for (name, x) in [("v", v), ("n", n), ("k", k)] {
            if x == 0 {
                return Err(Error::invalid(name, "must be >= 1"));
            }
        }
        Ok(Self { v, n, k })
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// True when `n` is short enough that the approximation may be loose.
    pub fn small_n_warning(&self) -> bool {
        self.n < MIN_ACCURATE_N
    }
}

/// Method tag carried by every error-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    QuadratureExact,
    QuadratureLinearized,
    ClosedForm,
    Asymptotic,
    FixedPower,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::QuadratureExact => "quadrature_exact",
            Method::QuadratureLinearized => "quadrature_linearized",
            Method::ClosedForm => "closed_form",
            Method::Asymptotic => "asymptotic",
            Method::FixedPower => "fixed_power",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProbEstimate {
    pub value: f64,
    pub method: Method,
    /// Monte Carlo standard error or quadrature error bound.
    pub uncertainty: f64,
    pub fallback_used: bool,
}

impl ErrorProbEstimate {
    pub(crate) fn new(value: f64, method: Method, uncertainty: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method,
            uncertainty: uncertainty.abs(),
            fallback_used: false,
        }
    }
}

/// SNR scale `mu` such that `gamma = mu * h~ * g~` with `h~, g~ ~ Gamma(m, 1)`.
pub fn mu_factor(params: &SystemParams, v: u64, n: u64) -> f64 {
    let pl = params.path_loss();
    params.eta * v as f64 * params.p_d / (params.m * params.m * n as f64 * pl * pl * params.sigma2_d)
}

/// Density of the product of two independent `Gamma(m, 1)` variates.
pub fn product_pdf(z: f64, m: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("product_pdf", format!("z must be > 0, got {z}")));
    }
    if !(m >= 0.5) {
        return Err(Error::domain("product_pdf", format!("m must be >= 0.5, got {m}")));
    }
    let x = 2.0 * z.sqrt();
    let k0s = bessel_k(0, x, true)?;
    let ln_pref = LN_2 - 2.0 * ln_gamma(m) + (m - 1.0) * z.ln() - x;
    Ok(k0s * ln_pref.exp())
}

/// Shannon capacity and channel dispersion of a real AWGN channel at SNR
/// `gamma`, in bits and bits^2 per channel use.
pub fn awgn_normal_terms(gamma: f64) -> (f64, f64) {
    let capacity = gamma.ln_1p() * LOG2_E;
    let onep = 1.0 + gamma;
    // 1 - 1/(1+g)^2 without cancellation
    let dispersion = gamma * (2.0 + gamma) / (onep * onep) * LOG2_E * LOG2_E;
    (capacity, dispersion)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationMetrics {
    pub rate: f64,
    pub delay: u64,
    pub time_share: f64,
}

pub fn allocation_metrics(alloc: &BlockAllocation) -> AllocationMetrics {
    let delay = alloc.v + alloc.n;
    AllocationMetrics {
        rate: alloc.rate(),
        delay,
        time_share: alloc.v as f64 / delay as f64,
    }
}

/// Harvested energy (J) and the resulting WIT transmit power (W) for one
/// realization of the downlink power gain `h2`.
pub fn energy_budget(params: &SystemParams, v: u64, n: u64, h2: f64) -> (f64, f64) {
    let harvested = params.eta * params.p_d * h2 * v as f64 * params.t_c / params.path_loss();
    let tx_power = harvested / (n as f64 * params.t_c);
    (harvested, tx_power)
}

/// Received SNR at the destination for transmit power `tx_power` and
/// uplink power gain `g2`.
pub fn received_snr(params: &SystemParams, tx_power: f64, g2: f64) -> f64 {
    tx_power * g2 / (params.path_loss() * params.sigma2_d)
}
