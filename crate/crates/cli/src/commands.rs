use std::path::Path;

use rayon::prelude::*;
use urcwet_core::optimizer::DelayBudget;
use urcwet_core::{
    allocation_metrics, best_fixed_power, eps_closed_form, eps_monte_carlo, eps_outage_asymptotic,
    eps_quadrature, linearization_params, min_delay, min_error_given_delay, min_wet_blocklength,
    BlockAllocation, DelaySearch, ErrorProbEstimate, Integrand, RandomStream, SystemParams, WetSearch,
};

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{flags, opt_int, opt_real, real, Table};

const QUAD_TOL: f64 = 1e-10;
/// Relative agreement required between the closed form and linearized quadrature.
pub const IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] urcwet_core::Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepMode {
    DelayVsN,
    MinDelayVsK,
    EpsVsDelta,
    FixedPowerVsDelta,
}

fn mc_estimate(
    params: &SystemParams,
    alloc: &BlockAllocation,
    samples: u64,
    stream: &RandomStream,
) -> Result<Option<ErrorProbEstimate>> {
    if samples == 0 {
        return Ok(None);
    }
    Ok(Some(eps_monte_carlo(params, alloc, samples, stream)?))
}

pub fn eval(cfg: &ScenarioConfig, v: Option<u64>, n: Option<u64>, out: Option<&Path>) -> Result<()> {
    let k = cfg.require_k()?;
    let n = n.or(cfg.n).ok_or_else(|| ConfigError::Missing("n".into()))?;
    let v = v.or(cfg.v).ok_or_else(|| ConfigError::Missing("v".into()))?;
    let p = &cfg.params;
    let alloc = BlockAllocation::new(v, n, k).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let qp = linearization_params(p, &alloc)?;
    let metrics = allocation_metrics(&alloc);

    let mc = mc_estimate(p, &alloc, cfg.mc_samples, &RandomStream::new(cfg.seed))?;
    let exact = eps_quadrature(p, &alloc, Integrand::ExactQ, QUAD_TOL)?;
    let lin = eps_quadrature(p, &alloc, Integrand::Linearized, QUAD_TOL)?;
    let closed = eps_closed_form(p, &alloc)?;
    let asym = eps_outage_asymptotic(p, &alloc)?;

    let mut t = Table::new(&[
        "m",
        "k",
        "n",
        "v",
        "rate",
        "delta",
        "delta_seconds",
        "nu",
        "mu",
        "theta",
        "beta",
        "varrho",
        "vartheta",
        "eps_mc",
        "mc_stderr",
        "eps_quad_exact",
        "eps_quad_lin",
        "eps_closed",
        "eps_asymptotic",
        "flags",
    ]);
    t.push(vec![
        real(p.m),
        k.to_string(),
        n.to_string(),
        v.to_string(),
        real(metrics.rate),
        metrics.delay.to_string(),
        real(metrics.delay as f64 * p.t_c),
        real(metrics.time_share),
        real(qp.mu),
        real(qp.theta),
        real(qp.beta),
        real(qp.varrho),
        real(qp.vartheta),
        opt_real(mc.map(|e| e.value)),
        opt_real(mc.map(|e| e.uncertainty)),
        real(exact.value),
        real(lin.value),
        real(closed.value),
        real(asym.value),
        flags(&[
            ("varrho_clamped", qp.clamped),
            ("fallback", closed.fallback_used),
            ("small_n", alloc.small_n_warning()),
        ]),
    ]);
    t.emit(out)?;
    Ok(())
}

struct ValidationRow {
    m: f64,
    k: u64,
    n: u64,
    eps_target: f64,
    v: Option<u64>,
    mc: Option<ErrorProbEstimate>,
    exact: f64,
    lin: f64,
    closed: f64,
    fallback: bool,
    clamped: bool,
}

impl ValidationRow {
    fn identity_failed(&self) -> bool {
        self.v.is_some() && !self.fallback && ((self.closed - self.lin) / self.lin).abs() > IDENTITY_TOL
    }
}

pub fn validate(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let g = &cfg.grid;
    if g.is_empty() {
        return Err(ConfigError::Invalid("validation grid is empty".into()).into());
    }
    let mut points = Vec::new();
    for &m in &g.m {
        for &k in &g.k {
            for &n in &g.n {
                for &eps in &g.eps {
                    points.push((m, k, n, eps));
                }
            }
        }
    }
    for &(m, k, n, eps) in &points {
        let p = cfg.params.with_m(m);
        p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if k == 0 || n == 0 || !(eps > 0.0 && eps < 1.0) {
            return Err(ConfigError::Invalid(format!("bad grid point m={m} k={k} n={n} eps={eps}")).into());
        }
    }

    let root = RandomStream::new(cfg.seed);
    let wet = WetSearch {
        v_max: cfg.v_max,
        ..WetSearch::default()
    };
    let rows: Vec<ValidationRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(m, k, n, eps_target))| -> Result<ValidationRow> {
            let p = cfg.params.with_m(m);
            let mut row = ValidationRow {
                m,
                k,
                n,
                eps_target,
                v: None,
                mc: None,
                exact: f64::NAN,
                lin: f64::NAN,
                closed: f64::NAN,
                fallback: false,
                clamped: false,
            };
            let Some(v) = min_wet_blocklength(&p, k, n, eps_target, &wet)?.v_star else {
                return Ok(row);
            };
            let alloc = BlockAllocation::new(v, n, k)?;
            let closed = eps_closed_form(&p, &alloc)?;
            row.v = Some(v);
            row.mc = mc_estimate(&p, &alloc, cfg.mc_samples, &root.split(i as u64))?;
            row.exact = eps_quadrature(&p, &alloc, Integrand::ExactQ, QUAD_TOL)?.value;
            row.lin = eps_quadrature(&p, &alloc, Integrand::Linearized, QUAD_TOL)?.value;
            row.closed = closed.value;
            row.fallback = closed.fallback_used;
            row.clamped = linearization_params(&p, &alloc)?.clamped;
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(&[
        "m",
        "k",
        "n",
        "eps_target",
        "v",
        "eps_mc",
        "mc_stderr",
        "eps_quad_exact",
        "eps_quad_lin",
        "eps_closed",
        "log10_ratio_closed_vs_exact",
        "flags",
    ]);
    for r in &rows {
        t.push(vec![
            real(r.m),
            r.k.to_string(),
            r.n.to_string(),
            real(r.eps_target),
            opt_int(r.v),
            opt_real(r.mc.map(|e| e.value)),
            opt_real(r.mc.map(|e| e.uncertainty)),
            opt_real(r.v.map(|_| r.exact)),
            opt_real(r.v.map(|_| r.lin)),
            opt_real(r.v.map(|_| r.closed)),
            opt_real(r.v.map(|_| (r.closed / r.exact).log10())),
            flags(&[
                ("infeasible", r.v.is_none()),
                ("varrho_clamped", r.clamped),
                ("fallback", r.fallback),
                ("identity_fail", r.identity_failed()),
            ]),
        ]);
    }
    t.emit(out)?;
    let failures = rows.iter().filter(|r| r.identity_failed()).count();
    if failures > 0 {
        return Err(CliError::Failed(format!(
            "{failures} of {} points failed the closed-form identity check",
            rows.len()
        )));
    }
    Ok(())
}

pub fn sweep(cfg: &ScenarioConfig, mode: SweepMode, out: Option<&Path>) -> Result<()> {
    match mode {
        SweepMode::DelayVsN => delay_vs_n(cfg, out),
        SweepMode::MinDelayVsK => min_delay_vs_k(cfg, out),
        SweepMode::EpsVsDelta => eps_vs_delta(cfg, out),
        SweepMode::FixedPowerVsDelta => fixed_power_vs_delta(cfg, out),
    }
}

fn delay_vs_n(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let k = cfg.require_k()?;
    let targets = cfg.require_targets()?;
    let ns: Vec<u64> = (cfg.n_min..=cfg.n_max).step_by(cfg.n_step as usize).collect();
    let points: Vec<(f64, u64)> = targets.iter().flat_map(|&e| ns.iter().map(move |&n| (e, n))).collect();
    let wet = WetSearch {
        v_max: cfg.v_max,
        evaluator: cfg.evaluator,
    };
    let sols = points
        .par_iter()
        .map(|&(eps0, n)| min_wet_blocklength(&cfg.params, k, n, eps0, &wet))
        .collect::<urcwet_core::Result<Vec<_>>>()?;

    let mut t = Table::new(&[
        "k",
        "eps_target",
        "n",
        "v",
        "delta",
        "delta_seconds",
        "nu",
        "eps",
        "feasible",
        "evaluator",
    ]);
    for (&(eps0, n), sol) in points.iter().zip(&sols) {
        let delta = sol.v_star.map(|v| v + n);
        t.push(vec![
            k.to_string(),
            real(eps0),
            n.to_string(),
            opt_int(sol.v_star),
            opt_int(delta),
            opt_real(delta.map(|d| d as f64 * cfg.params.t_c)),
            opt_real(sol.v_star.zip(delta).map(|(v, d)| v as f64 / d as f64)),
            real(sol.eps),
            sol.v_star.is_some().to_string(),
            cfg.evaluator.as_str().to_string(),
        ]);
    }
    t.emit(out)?;
    for &eps0 in targets {
        let any = points.iter().zip(&sols).any(|(&(e, _), s)| e == eps0 && s.v_star.is_some());
        if !any {
            return Err(CliError::Failed(format!("target {eps0} is infeasible for every n")));
        }
    }
    Ok(())
}

fn min_delay_vs_k(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let ks = if cfg.k_list.is_empty() {
        vec![cfg.require_k()?]
    } else {
        cfg.k_list.clone()
    };
    if ks.contains(&0) {
        return Err(ConfigError::Invalid("k_list entries must be >= 1".into()).into());
    }
    let targets = cfg.require_targets()?;
    let search = DelaySearch {
        n_min: cfg.n_min,
        n_max: cfg.n_max,
        n_step: cfg.n_step,
        v_max: cfg.v_max,
        evaluator: cfg.evaluator,
        certify: cfg.certify,
        ..DelaySearch::default()
    };
    let mut t = Table::new(&[
        "k",
        "eps_target",
        "n_star",
        "v_star",
        "delta_star",
        "delta_seconds",
        "nu",
        "eps_achieved",
        "eps_certified",
        "feasible",
        "evaluator",
    ]);
    let mut infeasible = Vec::new();
    for &eps0 in targets {
        for &k in &ks {
            let r = min_delay(&cfg.params, k, eps0, &search)?;
            if !r.feasible {
                infeasible.push((k, eps0));
            }
            t.push(vec![
                k.to_string(),
                real(eps0),
                r.n_star.to_string(),
                r.v_star.to_string(),
                r.delta_star.to_string(),
                real(r.delta_seconds),
                real(r.nu),
                real(r.eps_achieved),
                opt_real(r.eps_certified),
                r.feasible.to_string(),
                r.evaluator.as_str().to_string(),
            ]);
        }
    }
    t.emit(out)?;
    if !infeasible.is_empty() {
        return Err(CliError::Failed(format!("infeasible (k, eps_target) points: {infeasible:?}")));
    }
    Ok(())
}

fn budget(cfg: &ScenarioConfig) -> DelayBudget {
    DelayBudget {
        n_floor: cfg.n_min,
        evaluator: cfg.evaluator,
    }
}

fn eps_vs_delta(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let k = cfg.require_k()?;
    let b = budget(cfg);
    let mut t = Table::new(&[
        "k",
        "delta",
        "delta_seconds",
        "n_star",
        "v_star",
        "nu",
        "eps_star",
        "evaluator",
    ]);
    for &delta in cfg.require_deltas()? {
        let r = min_error_given_delay(&cfg.params, k, delta, &b)?;
        t.push(vec![
            k.to_string(),
            delta.to_string(),
            real(delta as f64 * cfg.params.t_c),
            r.n_star.to_string(),
            r.v_star.to_string(),
            real(r.v_star as f64 / delta as f64),
            real(r.eps_star),
            cfg.evaluator.as_str().to_string(),
        ]);
    }
    t.emit(out)?;
    Ok(())
}

fn fixed_power_vs_delta(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let k = cfg.require_k()?;
    let b = budget(cfg);
    let mut t = Table::new(&[
        "k",
        "delta",
        "delta_seconds",
        "n_star",
        "v_star",
        "nu",
        "p_hat_star",
        "eps_star",
    ]);
    for &delta in cfg.require_deltas()? {
        let r = best_fixed_power(&cfg.params, k, delta, &b)?;
        t.push(vec![
            k.to_string(),
            delta.to_string(),
            real(delta as f64 * cfg.params.t_c),
            r.n_star.to_string(),
            r.v_star.to_string(),
            real(r.v_star as f64 / delta as f64),
            real(r.p_hat_star),
            real(r.eps_star),
        ]);
    }
    t.emit(out)?;
    Ok(())
}
