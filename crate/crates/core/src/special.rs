//! Probabilist's Hermite polynomials, the standard Gaussian density and a
//! handful of scalar special functions (Γ, erf/erfc, ζ).
//!
//! Hermite polynomials are normalised to unit norm in L²(ρ), so that
//! `H_0 = 1`, `H_1 = x` and
//!
//! ```text
//! H_{k+1}(x) = (x H_k(x) - √k H_{k-1}(x)) / √(k+1).
//! ```
//!
//! The plain evaluator overflows once `|H_k(x)|` leaves the f64 range. The
//! scaled evaluator returns `H_k(x) e^{-x²/4}`, which is bounded by Cramér's
//! constant for every `k` and `x`, and the log evaluator returns
//! `ln |H_k(x)|` together with the sign.

use std::f64::consts::{LN_10, PI};

use crate::error::{invalid, Error, Result};

/// `1 / √(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Cramér's bound: `|H_k(x)| e^{-x²/4} ≤ CRAMER_BOUND` for all k, x.
pub const CRAMER_BOUND: f64 = 1.086_435;

const RESCALE_THRESHOLD: f64 = 1e100;
const RESCALE_FACTOR: f64 = 1e-100;
const RESCALE_LOG: f64 = 100.0 * LN_10;

/// `H_k(x)` together with `H_{k-1}(x)` (zero for `k = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteEval {
    pub k: usize,
    pub value: f64,
    pub value_prev: f64,
}

/// Last two recurrence values stored with a shared scale: the true values are
/// `cur * e^{log_scale}` and `prev * e^{log_scale}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RescaledPair {
    pub cur: f64,
    pub prev: f64,
    pub log_scale: f64,
}

pub(crate) fn hermite_rescaled(k: usize, x: f64) -> RescaledPair {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for j in 0..k {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            cur *= RESCALE_FACTOR;
            prev *= RESCALE_FACTOR;
            log_scale += RESCALE_LOG;
        }
    }
    RescaledPair {
        cur,
        prev,
        log_scale,
    }
}

fn apply_log_scale(value: f64, log_scale: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    if log_scale.abs() < 700.0 {
        value * log_scale.exp()
    } else {
        value.signum() * (value.abs().ln() + log_scale).exp()
    }
}

/// Orthonormal probabilist's Hermite polynomial `H_k(x)`.
///
/// Returns `±inf` when the value is outside the f64 range; use
/// [`hermite_eval_scaled`] or [`hermite_log_abs`] there.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    hermite_pair(k, x).value
}

/// Like [`hermite_eval`] but reports overflow as an error.
pub fn try_hermite_eval(k: usize, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("hermite_eval: x must be finite, got {x}")));
    }
    let v = hermite_eval(k, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!(
            "H_{k}({x}) exceeds f64 range; use the scaled evaluator"
        )))
    }
}

/// `H_k(x)` and `H_{k-1}(x)` from one pass of the recurrence.
pub fn hermite_pair(k: usize, x: f64) -> HermiteEval {
    let p = hermite_rescaled(k, x);
    HermiteEval {
        k,
        value: apply_log_scale(p.cur, p.log_scale),
        value_prev: apply_log_scale(p.prev, p.log_scale),
    }
}

/// `H_k(x) e^{-x²/4}`; bounded for every k and x.
pub fn hermite_eval_scaled(k: usize, x: f64) -> f64 {
    let p = hermite_rescaled(k, x);
    apply_log_scale(p.cur, p.log_scale - 0.25 * x * x)
}

/// `(ln |H_k(x)|, sign H_k(x))`. The log is `-inf` at a root.
pub fn hermite_log_abs(k: usize, x: f64) -> (f64, f64) {
    let p = hermite_rescaled(k, x);
    (p.cur.abs().ln() + p.log_scale, p.cur.signum())
}

/// `H_k'(x) = √k H_{k-1}(x)`; rejected for `k = 0`.
pub fn hermite_deriv(k: usize, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("hermite_deriv: degree must be at least 1"));
    }
    Ok((k as f64).sqrt() * hermite_eval(k - 1, x))
}

/// Streams `H_k(x) e^{-x²/4}` for k = 0, 1, 2, ... in O(1) per step.
#[derive(Debug, Clone)]
pub struct ScaledHermiteIter {
    x: f64,
    k: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
    factor: f64,
}

impl ScaledHermiteIter {
    pub fn new(x: f64) -> Self {
        let log_scale = -0.25 * x * x;
        Self {
            x,
            k: 0,
            prev: 0.0,
            cur: 1.0,
            log_scale,
            factor: log_scale.exp(),
        }
    }
}

impl Iterator for ScaledHermiteIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = if self.log_scale > -700.0 {
            self.cur * self.factor
        } else {
            apply_log_scale(self.cur, self.log_scale)
        };
        let k = self.k as f64;
        let next = (self.x * self.cur - k.sqrt() * self.prev) / (k + 1.0).sqrt();
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        if self.cur.abs() > RESCALE_THRESHOLD {
            self.cur *= RESCALE_FACTOR;
            self.prev *= RESCALE_FACTOR;
            self.log_scale += RESCALE_LOG;
            self.factor = self.log_scale.exp();
        }
        Some(out)
    }
}

/// Standard normal density `ρ(x) = e^{-x²/2} / √(2π)`.
pub fn gaussian_weight(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `E|X|^p` for `X ~ N(0, 1)`: `2^{p/2} Γ((p+1)/2) / √π`.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("gaussian_abs_moment: p must be positive, got {p}")));
    }
    let a = 0.5 * (p + 1.0);
    if a < 150.0 {
        Ok(2f64.powf(0.5 * p) * gamma(a) / PI.sqrt())
    } else {
        Ok((0.5 * p * 2f64.ln() + ln_gamma(a) - 0.5 * PI.ln()).exp())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    LANCZOS_COEF[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64))
}

/// Γ(x) by the Lanczos approximation (g = 7), with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    // Exact for small positive integers.
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

const ERF_SERIES_LIMIT: f64 = 3.0;

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/√π e^{-x²} Σ 2^n x^{2n+1} / (2n+1)!!, all terms positive.
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < ERF_SERIES_LIMIT {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// Complementary error function, accurate in relative terms for large x.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < ERF_SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `erf(b) - erf(a)` for `0 ≤ a ≤ b`, via erfc differences when both are in the tail.
pub fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= ERF_SERIES_LIMIT {
        erfc(a) - erfc(b)
    } else {
        erf(b) - erf(a)
    }
}

// B_2, B_4, ..., B_14
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta ζ(s) for real `s > 1`: a direct partial sum plus the
/// Euler-Maclaurin tail.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid(format!("zeta: s must exceed 1, got {s}")));
    }
    const N: usize = 16;
    let nf = N as f64;
    // Sum small terms first.
    let mut sum: f64 = (1..N).rev().map(|m| (m as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    let mut rising = s; // s (s+1) ... (s+2k-2)
    let mut fact = 2.0; // (2k)!
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = (i + 1) as f64;
        sum += b / fact * rising * nf.powf(-s - 2.0 * k + 1.0);
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    Ok(sum)
}
