//! Blocklength optimization.
//!
//! All searches rely on the error probability being nonincreasing in the
//! WET blocklength `v` at fixed `(n, k)`. No such property is assumed in
//! `n`: scans over `n` start on a coarse grid and then sweep every integer
//! candidate between the neighbors of the coarse minimum.

use rayon::prelude::*;

use crate::evaluators::{eps_fixed_power, eps_quadrature, Evaluator, Integrand, DEFAULT_QUAD_TOL};
use crate::model::{BlockAllocation, SystemParams};
use crate::{Error, Result};

pub const DEFAULT_V_MAX: u64 = 1_000_000_000;

/// Options for [`min_wet_blocklength`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WetSearch {
    pub v_max: u64,
    pub evaluator: Evaluator,
}

impl Default for WetSearch {
    fn default() -> Self {
        Self {
            v_max: DEFAULT_V_MAX,
            evaluator: Evaluator::ClosedForm,
        }
    }
}

/// Smallest feasible `v`, or the error reached at the cap when none is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WetSolution {
    pub v_star: Option<u64>,
    /// Error at `v_star`, or at `v_max` when infeasible.
    pub eps: f64,
}

fn check_target(eps0: f64) -> Result<()> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::invalid("eps0", format!("must lie in (0, 1), got {eps0}")));
    }
    Ok(())
}

fn eps_at(params: &SystemParams, evaluator: Evaluator, v: u64, n: u64, k: u64) -> Result<f64> {
    let alloc = BlockAllocation::new(v, n, k)?;
    Ok(evaluator.evaluate(params, &alloc)?.value)
}

/// Smallest integer `v` with `eps(v, n, k) <= eps0`: exponential bracketing
/// from `v = n`, then bisection.
pub fn min_wet_blocklength(
    params: &SystemParams,
    k: u64,
    n: u64,
    eps0: f64,
    search: &WetSearch,
) -> Result<WetSolution> {
    check_target(eps0)?;
    params.validate()?;
    if search.v_max == 0 {
        return Err(Error::invalid("v_max", "must be >= 1"));
    }
    let eval = |v: u64| eps_at(params, search.evaluator, v, n, k);

    // invariant: eps(lo) > eps0 (lo = 0 is a sentinel), eps(hi) <= eps0
    let start = n.clamp(1, search.v_max);
    let e_start = eval(start)?;
    let (mut lo, mut hi, mut e_hi) = if e_start <= eps0 {
        (0, start, e_start)
    } else {
        let mut lo = start;
        loop {
            if lo >= search.v_max {
                return Ok(WetSolution {
                    v_star: None,
                    eps: eval(search.v_max)?,
                });
            }
            let hi = lo.saturating_mul(2).min(search.v_max);
            let e = eval(hi)?;
            if e <= eps0 {
                break (lo, hi, e);
            }
            lo = hi;
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = eval(mid)?;
        if e <= eps0 {
            hi = mid;
            e_hi = e;
        } else {
            lo = mid;
        }
    }
    Ok(WetSolution {
        v_star: Some(hi),
        eps: e_hi,
    })
}

/// Options for [`min_delay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySearch {
    pub n_min: u64,
    pub n_max: u64,
    /// Spacing of admissible WIT blocklengths.
    pub n_step: u64,
    pub v_max: u64,
    pub evaluator: Evaluator,
    /// Number of points in the initial geometric scan.
    pub coarse_points: usize,
    /// Re-evaluate the optimum with exact-Q quadrature.
    pub certify: bool,
}

impl Default for DelaySearch {
    fn default() -> Self {
        Self {
            n_min: 100,
            n_max: 5000,
            n_step: 1,
            v_max: DEFAULT_V_MAX,
            evaluator: Evaluator::ClosedForm,
            coarse_points: 40,
            certify: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub eps_target: f64,
    pub v_star: u64,
    pub n_star: u64,
    pub delta_star: u64,
    pub delta_seconds: f64,
    pub nu: f64,
    pub eps_achieved: f64,
    pub feasible: bool,
    pub evaluator: Evaluator,
    /// Exact-Q quadrature value at the optimum, when certification ran.
    pub eps_certified: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct NPoint {
    n: u64,
    sol: WetSolution,
}

impl NPoint {
    fn delay(&self) -> Option<u64> {
        self.sol.v_star.map(|v| v + self.n)
    }
}

/// Indices into a candidate list of length `len`, roughly geometric in the
/// candidate values, always including both ends.
fn geometric_indices(values: &[u64], points: usize) -> Vec<usize> {
    let len = values.len();
    if len <= 2 * points.max(2) {
        return (0..len).collect();
    }
    let lo = values[0] as f64;
    let hi = values[len - 1] as f64;
    let step = values.get(1).map_or(1, |v| v - values[0]) as f64;
    let mut idx: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            let target = lo * (hi / lo).powf(t);
            (((target - lo) / step).round() as usize).min(len - 1)
        })
        .collect();
    idx.dedup();
    idx
}

/// Coarse-to-fine integer argmin over `values`. `score` returns `None` for
/// infeasible points; ties go to the smaller index.
fn coarse_to_fine<T, F, K>(values: &[u64], points: usize, eval: F, key: K) -> Result<Vec<(usize, T)>>
where
    T: Send + Copy,
    F: Fn(u64) -> Result<T> + Sync,
    K: Fn(&T) -> Option<f64>,
{
    let coarse = geometric_indices(values, points);
    let mut seen: Vec<(usize, T)> = coarse
        .par_iter()
        .map(|&i| eval(values[i]).map(|t| (i, t)))
        .collect::<Result<_>>()?;
    let best = argmin(&seen, &key);
    if let Some(pos) = best {
        let lo = if pos == 0 { seen[0].0 } else { seen[pos - 1].0 };
        let hi = if pos + 1 == seen.len() { seen[pos].0 } else { seen[pos + 1].0 };
        let extra: Vec<usize> = (lo..=hi).filter(|i| !coarse.contains(i)).collect();
        let more: Vec<(usize, T)> = extra
            .par_iter()
            .map(|&i| eval(values[i]).map(|t| (i, t)))
            .collect::<Result<_>>()?;
        seen.extend(more);
        seen.sort_by_key(|(i, _)| *i);
    }
    Ok(seen)
}

fn argmin<T, K: Fn(&T) -> Option<f64>>(items: &[(usize, T)], key: &K) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (pos, (_, t)) in items.iter().enumerate() {
        if let Some(s) = key(t) {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((pos, s));
            }
        }
    }
    best.map(|(pos, _)| pos)
}

fn candidates(n_min: u64, n_max: u64, step: u64) -> Result<Vec<u64>> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::invalid("n_min", format!("need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")));
    }
    if step == 0 {
        return Err(Error::invalid("n_step", "must be >= 1"));
    }
    Ok((n_min..=n_max).step_by(step as usize).collect())
}

/// Minimum total delay `n + v` meeting `eps <= eps0`, over the admissible
/// WIT blocklengths.
pub fn min_delay(params: &SystemParams, k: u64, eps0: f64, search: &DelaySearch) -> Result<OptimizationResult> {
    check_target(eps0)?;
    params.validate()?;
    let ns = candidates(search.n_min, search.n_max, search.n_step)?;
    let wet = WetSearch {
        v_max: search.v_max,
        evaluator: search.evaluator,
    };
    let eval = |n: u64| min_wet_blocklength(params, k, n, eps0, &wet).map(|sol| NPoint { n, sol });
    let seen = coarse_to_fine(&ns, search.coarse_points, eval, |p: &NPoint| p.delay().map(|d| d as f64))?;

    let feasible = argmin(&seen, &|p: &NPoint| p.delay().map(|d| d as f64));
    let (point, is_feasible) = match feasible {
        Some(pos) => (seen[pos].1, true),
        None => {
            let pos = argmin(&seen, &|p: &NPoint| Some(p.sol.eps)).expect("non-empty scan");
            (seen[pos].1, false)
        }
    };
    let v = point.sol.v_star.unwrap_or(search.v_max);
    let delta = v + point.n;
    let eps_certified = if search.certify && is_feasible {
        let alloc = BlockAllocation::new(v, point.n, k)?;
        Some(eps_quadrature(params, &alloc, Integrand::ExactQ, DEFAULT_QUAD_TOL)?.value)
    } else {
        None
    };
    Ok(OptimizationResult {
        eps_target: eps0,
        v_star: v,
        n_star: point.n,
        delta_star: delta,
        delta_seconds: delta as f64 * params.t_c,
        nu: v as f64 / delta as f64,
        eps_achieved: point.sol.eps,
        feasible: is_feasible,
        evaluator: search.evaluator,
        eps_certified,
    })
}

/// Options for [`min_error_given_delay`] and [`best_fixed_power`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBudget {
    /// Smallest WIT blocklength considered (clamped to `delta - 1`).
    pub n_floor: u64,
    pub evaluator: Evaluator,
}

impl Default for DelayBudget {
    fn default() -> Self {
        Self {
            n_floor: 100,
            evaluator: Evaluator::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinErrorResult {
    pub delta: u64,
    pub eps_star: f64,
    pub n_star: u64,
    pub v_star: u64,
}

fn delay_split(delta: u64, n_floor: u64) -> Result<(u64, u64)> {
    if delta < 2 {
        return Err(Error::invalid("delta", format!("must be >= 2, got {delta}")));
    }
    Ok((n_floor.clamp(1, delta - 1), delta - 1))
}

/// Minimum error over every split `n + v = delta` (exhaustive integer scan).
pub fn min_error_given_delay(
    params: &SystemParams,
    k: u64,
    delta: u64,
    budget: &DelayBudget,
) -> Result<MinErrorResult> {
    params.validate()?;
    let (lo, hi) = delay_split(delta, budget.n_floor)?;
    let values: Vec<(u64, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|n| eps_at(params, budget.evaluator, delta - n, n, k).map(|e| (n, e)))
        .collect::<Result<_>>()?;
    let (n_star, eps_star) = values
        .iter()
        .copied()
        .fold(None, |best: Option<(u64, f64)>, (n, e)| match best {
            Some((_, b)) if b <= e => best,
            _ => Some((n, e)),
        })
        .expect("non-empty range");
    Ok(MinErrorResult {
        delta,
        eps_star,
        n_star,
        v_star: delta - n_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPowerResult {
    pub delta: u64,
    pub p_hat_star: f64,
    pub eps_star: f64,
    pub n_star: u64,
    pub v_star: u64,
}

const P_GRID_LO: f64 = -9.0;
const P_GRID_HI: f64 = 0.0;
const P_GRID_PER_DECADE: usize = 4;
const P_GRID_LIMITS: (f64, f64) = (-30.0, 6.0);

/// Best fixed power for one allocation: a log grid that widens while the
/// minimum sits on its edge, then golden-section refinement in `log10 p`.
fn best_power_for(params: &SystemParams, alloc: &BlockAllocation) -> Result<(f64, f64)> {
    let eval = |lp: f64| eps_fixed_power(params, alloc, 10f64.powf(lp)).map(|e| e.value);
    let (mut lo, mut hi) = (P_GRID_LO, P_GRID_HI);
    loop {
        let steps = ((hi - lo) * P_GRID_PER_DECADE as f64).round() as usize;
        let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
        let vals = grid.iter().map(|&lp| eval(lp)).collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (i, &v) in vals.iter().enumerate() {
            if v < vals[best] {
                best = i;
            }
        }
        let at_low_edge = best == 0 && lo > P_GRID_LIMITS.0;
        let at_high_edge = best == steps && hi < P_GRID_LIMITS.1;
        if at_low_edge {
            lo = (lo - 3.0).max(P_GRID_LIMITS.0);
            continue;
        }
        if at_high_edge {
            hi = (hi + 3.0).min(P_GRID_LIMITS.1);
            continue;
        }
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(steps)];
        let (lp, e) = golden_section(&eval, a, b, 1e-6)?;
        return Ok(if e <= vals[best] {
            (10f64.powf(lp), e)
        } else {
            (10f64.powf(grid[best]), vals[best])
        });
    }
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Joint search over the WIT blocklength and a fixed transmit power.
pub fn best_fixed_power(
    params: &SystemParams,
    k: u64,
    delta: u64,
    budget: &DelayBudget,
) -> Result<FixedPowerResult> {
    params.validate()?;
    let (lo, hi) = delay_split(delta, budget.n_floor)?;
    let ns: Vec<u64> = (lo..=hi).collect();
    let eval = |n: u64| {
        let alloc = BlockAllocation::new(delta - n, n, k)?;
        best_power_for(params, &alloc)
    };
    let seen = coarse_to_fine(&ns, 40, eval, |&(_, e): &(f64, f64)| Some(e))?;
    let pos = argmin(&seen, &|&(_, e): &(f64, f64)| Some(e)).expect("non-empty scan");
    let (idx, (p_hat, eps)) = seen[pos];
    let n = ns[idx];
    Ok(FixedPowerResult {
        delta,
        p_hat_star: p_hat,
        eps_star: eps,
        n_star: n,
        v_star: delta - n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_indices_cover_ends() {
        let values: Vec<u64> = (100..=5000).collect();
        let idx = geometric_indices(&values, 40);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), values.len() - 1);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let small: Vec<u64> = (100..=200).step_by(10).collect();
        assert_eq!(geometric_indices(&small, 40).len(), small.len());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(&|x: f64| Ok((x - 0.3) * (x - 0.3) + 1.0), -2.0, 2.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argument_checks() {
        let p = SystemParams::reference();
        let w = WetSearch::default();
        assert!(min_wet_blocklength(&p, 216, 300, 0.0, &w).is_err());
        assert!(min_wet_blocklength(&p, 216, 300, 1.0, &w).is_err());
        assert!(min_error_given_delay(&p, 216, 1, &DelayBudget::default()).is_err());
        let bad = DelaySearch {
            n_min: 300,
            n_max: 200,
            ..DelaySearch::default()
        };
        assert!(min_delay(&p, 216, 1e-3, &bad).is_err());
    }

    #[test]
    fn infeasible_is_a_value() {
        let p = SystemParams::reference();
        let w = WetSearch {
            v_max: 50,
            evaluator: Evaluator::ClosedForm,
        };
        let sol = min_wet_blocklength(&p, 216, 300, 1e-5, &w).unwrap();
        assert_eq!(sol.v_star, None);
        assert!(sol.eps > 1e-5);
    }

    #[test]
    fn loose_target_needs_one_channel_use() {
        let p = SystemParams::reference();
        let alloc = BlockAllocation::new(1, 1000, 8).unwrap();
        let oracle = eps_quadrature(&p, &alloc, Integrand::ExactQ, 1e-10).unwrap().value;
        assert!(oracle <= 0.999);
        let sol = min_wet_blocklength(&p, 8, 1000, 0.999, &WetSearch::default()).unwrap();
        assert_eq!(sol.v_star, Some(1));
    }
}
