//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;
use urcwet_core::optimizer::DelayBudget;
use urcwet_core::quad::{integrate, QuadOptions};
use urcwet_core::specfun::{gamma_fn, zpk0_antiderivative, zpk_t};
use urcwet_core::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn v_for(p: &SystemParams, k: u64, n: u64, eps0: f64) -> Option<u64> {
    min_wet_blocklength(p, k, n, eps0, &WetSearch::default()).unwrap().v_star
}

fn exact(p: &SystemParams, a: &BlockAllocation) -> f64 {
    eps_quadrature(p, a, Integrand::ExactQ, 1e-10).unwrap().value
}

fn closed_form_identity() -> Outcome {
    let mut points = Vec::new();
    for m in [1.0, 2.0, 3.0] {
        for k in [96, 216, 320] {
            for n in [100, 300, 1000] {
                for eps0 in [0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5] {
                    points.push((m, k, n, eps0));
                }
            }
        }
    }
    let results: Vec<(bool, f64)> = points
        .par_iter()
        .map(|&(m, k, n, eps0)| {
            let p = SystemParams::reference().with_m(m);
            let a = BlockAllocation::new(v_for(&p, k, n, eps0).unwrap(), n, k).unwrap();
            let cf = eps_closed_form(&p, &a).unwrap();
            let lin = eps_quadrature(&p, &a, Integrand::Linearized, 1e-11).unwrap().value;
            (cf.fallback_used, ((cf.value - lin) / lin).abs())
        })
        .collect();
    let fallbacks = results.iter().filter(|r| r.0).count();
    let worst = results.iter().filter(|r| !r.0).map(|r| r.1).fold(0.0, f64::max);
    check(
        worst <= 1e-6 && (fallbacks as f64) < 0.05 * points.len() as f64,
        format!("{} points, worst rel diff {worst:.2e}, {fallbacks} fallbacks", points.len()),
    )
}

fn approximation_fidelity() -> Outcome {
    let p = SystemParams::reference();
    let mut points = Vec::new();
    for n in (100..=5000).step_by(50) {
        for eps0 in [0.3, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
            if let Some(v) = v_for(&p, 216, n, eps0) {
                for v in [v / 2, v, 2 * v] {
                    points.push((n, v.max(1)));
                }
            }
        }
    }
    let ratios: Vec<Option<f64>> = points
        .par_iter()
        .map(|&(n, v)| {
            let a = BlockAllocation::new(v, n, 216).unwrap();
            let e = exact(&p, &a);
            (e >= 1e-6).then(|| (eps_closed_form(&p, &a).unwrap().value / e).log10().abs())
        })
        .collect();
    let used: Vec<f64> = ratios.into_iter().flatten().collect();
    let worst = used.iter().copied().fold(0.0, f64::max);
    check(
        worst <= 0.1 && !used.is_empty(),
        format!("{} points with eps >= 1e-6, worst |log10 ratio| {worst:.4}", used.len()),
    )
}

fn monte_carlo_consistency() -> Outcome {
    let configs = [
        (3.0, 216, 300, 0.3),
        (3.0, 216, 300, 3e-2),
        (2.0, 128, 200, 5e-3),
        (1.0, 96, 500, 1e-3),
        (3.0, 320, 1000, 1.5e-4),
    ];
    let root = RandomStream::new(2024);
    let mut worst: f64 = 0.0;
    for (i, &(m, k, n, eps0)) in configs.iter().enumerate() {
        let p = SystemParams::reference().with_m(m);
        let a = BlockAllocation::new(v_for(&p, k, n, eps0).unwrap(), n, k).unwrap();
        let e = exact(&p, &a);
        if !(1e-4..=0.3).contains(&e) {
            return Err(format!("config {i} has eps {e:.3e}, outside [1e-4, 0.3]"));
        }
        let mc = eps_monte_carlo(&p, &a, 10_000_000, &root.split(i as u64)).unwrap();
        worst = worst.max((mc.value - e).abs() / mc.uncertainty);
    }
    check(worst <= 3.0, format!("5 configs, 1e7 samples, worst deviation {worst:.2} SE"))
}

fn search() -> DelaySearch {
    DelaySearch {
        n_min: 100,
        n_max: 5000,
        ..DelaySearch::default()
    }
}

fn delay_anchor() -> Outcome {
    let p = SystemParams::reference();
    let strict = min_delay(&p, 216, 1e-5, &search()).unwrap();
    let loose = min_delay(&p, 216, 1e-3, &search()).unwrap();
    let ok = (strict.delta_star as f64 - 3300.0).abs() <= 330.0
        && strict.n_star < 500
        && loose.delta_star < strict.delta_star
        && loose.n_star < strict.n_star;
    check(
        ok,
        format!(
            "eps 1e-5: delay {} (n* {}, {:.2} ms), eps 1e-3: delay {} (n* {})",
            strict.delta_star,
            strict.n_star,
            strict.delta_seconds * 1e3,
            loose.delta_star,
            loose.n_star
        ),
    )
}

fn delay_vs_k_anchor() -> Outcome {
    let p = SystemParams::reference();
    let ks = [96, 128, 216, 320];
    let deltas: Vec<u64> = ks
        .iter()
        .map(|&k| min_delay(&p, k, 1e-5, &search()).unwrap().delta_star)
        .collect();
    let ok = (deltas[1] as f64 - 2000.0).abs() <= 200.0 && deltas.windows(2).all(|w| w[0] <= w[1]);
    check(ok, format!("k {ks:?} -> delay {deltas:?}"))
}

fn fixed_power_dominance() -> Outcome {
    let p = SystemParams::reference();
    let b = DelayBudget::default();
    let deltas = [500, 1000, 1500, 2000, 3000, 4000];
    let mut lines = Vec::new();
    let mut ok = true;
    let mut prev_n = 0;
    for delta in deltas {
        let a = min_error_given_delay(&p, 216, delta, &b).unwrap();
        let f = best_fixed_power(&p, 216, delta, &b).unwrap();
        ok &= f.eps_star >= a.eps_star;
        ok &= a.n_star + 1 >= prev_n;
        prev_n = a.n_star;
        lines.push(format!("{delta}: {:.2e}/{:.2e} n*={}", a.eps_star, f.eps_star, a.n_star));
    }
    check(ok, format!("adaptive/fixed [{}]", lines.join(", ")))
}

fn special_functions() -> Outcome {
    let opts = QuadOptions::with_rel_tol(1e-13);
    let mut failures = Vec::new();

    for m in [1.0, 2.0, 3.0, 5.0] {
        // z = q^2 / 4 keeps the log singularity of K0 integrable for the rule
        let pdf_q = |q: f64, power: i32| {
            let z = 0.25 * q * q;
            if z == 0.0 {
                0.0
            } else {
                product_pdf(z, m).unwrap() * z.powi(power) * 0.5 * q
            }
        };
        let mass = integrate(|q| pdf_q(q, 0), &[0.0, 2.0, 20.0, f64::INFINITY], &opts).value;
        let mean = integrate(|q| pdf_q(q, 1), &[0.0, 2.0, 20.0, f64::INFINITY], &opts).value;
        if (mass - 1.0).abs() > 1e-9 || (mean / (m * m) - 1.0).abs() > 1e-6 {
            failures.push(format!("pdf moments m={m}: {mass} {mean}"));
        }
    }

    let ctrl = SeriesControl::default();
    let points = [
        (0.6, 0.05),
        (0.6, 1.0),
        (0.6, 20.0),
        (1.0, 0.1),
        (1.0, 3.0),
        (1.0, 60.0),
        (2.0, 0.5),
        (2.0, 8.0),
        (2.0, 150.0),
        (4.0, 0.3),
        (4.0, 12.0),
        (4.0, 40.0),
    ];
    for (p, z) in points {
        let f = |x: f64| zpk0_antiderivative(p, x, &ctrl).unwrap();
        let h = 1e-3 * z;
        let fd = (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h);
        let want = zpk_t(p, 0, z).unwrap();
        if ((fd - want) / want).abs() > 1e-6 {
            failures.push(format!("derivative p={p} z={z}: {fd} vs {want}"));
        }
    }

    for m in [1.0, 2.0, 3.0, 5.0] {
        let limit = 0.5 * gamma_fn(m).powi(2);
        let f = zpk0_antiderivative(m - 1.0, 4000.0, &ctrl).unwrap();
        if ((f - limit) / limit).abs() > 1e-6 {
            failures.push(format!("limit m={m}: {f} vs {limit}"));
        }
    }

    for p in [0.6, 1.0, 2.0] {
        for order in [0, 1] {
            let vals: Vec<f64> = (4..=12).map(|e| zpk_t(p, order, 10f64.powi(-e)).unwrap()).collect();
            let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
            if !decreasing || zpk_t(p, order, 0.0).unwrap() != 0.0 || vals[8] >= 0.2 * vals[0] {
                failures.push(format!("small-z decay p={p} t={order}: {vals:?}"));
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "moments, 12 derivative points, large-z limits, small-z decay".into()
        } else {
            failures.join("; ")
        },
    )
}

fn brute_force_equivalence() -> Outcome {
    let p = SystemParams::reference();
    let (k, eps0) = (96, 1e-3);
    let ns: Vec<u64> = (100..=200).step_by(10).collect();
    let per_n: Vec<Option<u64>> = ns
        .par_iter()
        .map(|&n| {
            (1..=5000).find(|&v| {
                eps_closed_form(&p, &BlockAllocation::new(v, n, k).unwrap()).unwrap().value <= eps0
            })
        })
        .collect();
    let mut best: Option<(u64, u64)> = None;
    for (&n, v) in ns.iter().zip(&per_n) {
        if let Some(v) = *v {
            if best.is_none_or(|(bn, bv)| n + v < bn + bv) {
                best = Some((n, v));
            }
        }
    }
    let Some((n_bf, v_bf)) = best else {
        return Err("brute force found no feasible point".into());
    };
    let r = min_delay(
        &p,
        k,
        eps0,
        &DelaySearch {
            n_min: 100,
            n_max: 200,
            n_step: 10,
            v_max: 5000,
            certify: false,
            ..DelaySearch::default()
        },
    )
    .unwrap();
    check(
        r.feasible && (r.n_star, r.v_star) == (n_bf, v_bf),
        format!("optimizer (n, v) = ({}, {}), enumeration ({n_bf}, {v_bf})", r.n_star, r.v_star),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("s.conf");
    let base = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/reference.conf")).unwrap();
    let conf_text: String = base
        .lines()
        .filter(|l| !l.starts_with("n_step"))
        .map(|l| format!("{l}\n"))
        .collect::<String>()
        + "n_step = 7\n";
    std::fs::write(&conf, conf_text).unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_urcwet"))
            .arg("--config")
            .arg(&conf)
            .args(["--seed", "11", "--jobs", jobs, "sweep", "--mode", "delay_vs_n", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "4");
    let b = run("b.csv", "4");
    let c = run("c.csv", "1");
    check(
        a == b && a == c && !a.is_empty(),
        format!("{} bytes, identical across runs and thread counts", a.len()),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form identity", closed_form_identity),
        ("approximation fidelity", approximation_fidelity),
        ("monte carlo consistency", monte_carlo_consistency),
        ("minimum delay anchor", delay_anchor),
        ("minimum delay vs k", delay_vs_k_anchor),
        ("fixed-power dominance", fixed_power_dominance),
        ("special functions", special_functions),
        ("brute-force optimizer equivalence", brute_force_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {}. {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
