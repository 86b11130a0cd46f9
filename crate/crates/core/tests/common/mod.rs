//! Shared helpers for the integration suites: slow, assumption-free
//! numeric oracles used to cross-check closed-form solutions.

#![allow(dead_code)]

/// Golden-section search on a unimodal function over `[lo, hi]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Coarse grid scan over `[lo, hi]` followed by golden-section refinement
/// of the best bracket. Slow but makes no use of the formula under test.
pub fn numeric_argmin_1d<F: Fn(f64) -> f64 + Copy>(f: F, lo: f64, hi: f64) -> f64 {
    let n = 4000;
    let mut best = lo;
    let mut best_val = f(lo);
    for k in 1..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let v = f(x);
        if v < best_val {
            best_val = v;
            best = x;
        }
    }
    let step = (hi - lo) / n as f64;
    golden_min(
        f,
        (best - 2.0 * step).max(lo),
        (best + 2.0 * step).min(hi),
        120,
    )
}

/// Two-sided difference quotient.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
