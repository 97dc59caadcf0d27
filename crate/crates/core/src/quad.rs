//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::sum::NeumaierSum;

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
    0.022_935_322_010_529_22,
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
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrate `f` over the finite interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    let max_segments = 20_000;
    let mut heap = BinaryHeap::new();
    let (v, e) = kronrod(&f, a, b);
    heap.push(Segment { a, b, value: v, error: e });
    let mut evaluations = 15;
    loop {
        let mut total = NeumaierSum::new();
        let mut err = 0.0;
        for s in heap.iter() {
            total.add(s.value);
            err += s.error;
        }
        let value = total.value();
        let target = abs_tol.max(rel_tol * value.abs());
        if err <= target || heap.len() >= max_segments {
            return QuadResult { value, abs_error: err, evaluations, converged: err <= target };
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return QuadResult { value, abs_error: err, evaluations, converged: false };
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Integrate `f` over [a, inf) through the map x = a + t/(1-t).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let x = a + t / u;
        let v = f(x) / (u * u);
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(g, 0.0, 1.0, rel_tol, abs_tol)
}

/// Integrate `f` over (0, inf) in the logarithmic variable x = e^s,
/// restricted to s in [s_lo, s_hi].
pub fn integrate_log_grid<F: Fn(f64) -> f64>(f: F, s_lo: f64, s_hi: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    let panels = ((s_hi - s_lo) / 2.0).ceil().max(1.0) as usize;
    let width = (s_hi - s_lo) / panels as f64;
    let mut total = NeumaierSum::new();
    let mut err = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    for i in 0..panels {
        let lo = s_lo + width * i as f64;
        let r = integrate(|s: f64| {
            let x = s.exp();
            f(x) * x
        }, lo, lo + width, rel_tol, abs_tol / panels as f64);
        total.add(r.value);
        err += r.abs_error;
        evaluations += r.evaluations;
        converged &= r.converged;
    }
    QuadResult { value: total.value(), abs_error: err, evaluations, converged }
}
