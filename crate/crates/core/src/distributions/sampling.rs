//! Draw primitives threaded through [`GenState`]. Each is a pure function
//! of the incoming state.

use crate::rng::{next_double, next_std_normal, GenState};
use crate::special::ln_gamma;

pub fn normal(s: GenState, mu: f64, sigma: f64) -> (GenState, f64) {
    let (s, z) = next_std_normal(s);
    (s, mu + sigma * z)
}

pub fn exponential(s: GenState, rate: f64) -> (GenState, f64) {
    let (s, u) = next_double(s);
    (s, -(1.0 - u).ln() / rate)
}

/// Marsaglia–Tsang squeeze with unit scale; shape below one is boosted by
/// `G(k) = G(k + 1)·U^(1/k)`.
pub fn gamma_unit_scale(s: GenState, shape: f64) -> (GenState, f64) {
    if shape < 1.0 {
        let (s, g) = gamma_unit_scale(s, shape + 1.0);
        let (s, u) = next_double(s);
        return (s, g * u.powf(1.0 / shape));
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    let mut s = s;
    loop {
        let (next, x) = next_std_normal(s);
        s = next;
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let (next, u) = next_double(s);
        s = next;
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (s, d * v);
        }
    }
}

pub fn gamma(s: GenState, shape: f64, scale: f64) -> (GenState, f64) {
    let (s, g) = gamma_unit_scale(s, shape);
    (s, g * scale)
}

pub fn beta(s: GenState, a: f64, b: f64) -> (GenState, f64) {
    let (s, x) = gamma_unit_scale(s, a);
    let (s, y) = gamma_unit_scale(s, b);
    (s, x / (x + y))
}

/// Inversion for small means, Hörmann's PTRS rejection otherwise.
pub fn poisson(s: GenState, lambda: f64) -> (GenState, i64) {
    if lambda <= 10.0 {
        let (s, u) = next_double(s);
        let mut k = 0i64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if p == 0.0 {
                break;
            }
        }
        return (s, k);
    }
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let mut s = s;
    loop {
        let (next, u) = next_double(s);
        let (next, v) = next_double(next);
        s = next;
        let u = u - 0.5;
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return (s, k as i64);
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return (s, k as i64);
        }
    }
}

/// Sum of `n` Bernoulli draws.
pub fn binomial(s: GenState, p: f64, n: u64) -> (GenState, i64) {
    let mut s = s;
    let mut count = 0;
    for _ in 0..n {
        let (next, u) = next_double(s);
        s = next;
        if u < p {
            count += 1;
        }
    }
    (s, count)
}
