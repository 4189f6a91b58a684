//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The domain is given as an increasing list of breakpoints; the last one
//! may be `+inf`, in which case that piece is mapped onto `[0, 1)` with
//! `x = a + t / (1 - t)`. All pieces share one priority queue, so the
//! refinement effort goes wherever the error estimate is largest.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    infinite: bool,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over `[points[0], points[last]]`, splitting at every
/// interior point.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: &QuadOptions) -> QuadResult {
    assert!(points.len() >= 2, "need at least two breakpoints");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        debug_assert!(a <= b, "breakpoints must increase");
        if a == b {
            continue;
        }
        let piece = if b.is_infinite() {
            let base = a;
            let g = |t: f64| map_infinite(&f, base, t);
            evaluate(&g, 0.0, 1.0, true, &mut evaluations)
        } else {
            evaluate(&f, a, b, false, &mut evaluations)
        };
        heap.push(piece);
    }
    let base = points[points.len() - 2];

    loop {
        let (value, err) = totals(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target || heap.is_empty() {
            return QuadResult {
                value,
                abs_err: err,
                evaluations,
                converged: true,
            };
        }
        if heap.len() >= opts.max_intervals {
            return QuadResult {
                value,
                abs_err: err,
                evaluations,
                converged: false,
            };
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64; keep it and give up
            heap.push(worst);
            let (value, err) = totals(&heap);
            return QuadResult {
                value,
                abs_err: err,
                evaluations,
                converged: err <= opts.abs_tol.max(opts.rel_tol * value.abs()),
            };
        }
        let (left, right) = if worst.infinite {
            let g = |t: f64| map_infinite(&f, base, t);
            (
                evaluate(&g, worst.a, mid, true, &mut evaluations),
                evaluate(&g, mid, worst.b, true, &mut evaluations),
            )
        } else {
            (
                evaluate(&f, worst.a, mid, false, &mut evaluations),
                evaluate(&f, mid, worst.b, false, &mut evaluations),
            )
        };
        heap.push(left);
        heap.push(right);
    }
}

fn map_infinite<F: Fn(f64) -> f64>(f: &F, base: f64, t: f64) -> f64 {
    let one_minus = 1.0 - t;
    let x = base + t / one_minus;
    if x.is_infinite() {
        return 0.0;
    }
    let v = f(x) / (one_minus * one_minus);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (f64, f64) {
    // sum in a fixed order so results do not depend on heap layout
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.infinite.cmp(&q.infinite)));
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut err = 0.0;
    for p in pieces {
        let y = p.value - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
        err += p.err;
    }
    (value, err)
}

fn evaluate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    infinite: bool,
    evaluations: &mut usize,
) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    *evaluations += 15;
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Piece {
        a,
        b,
        value,
        err,
        infinite,
    }
}
