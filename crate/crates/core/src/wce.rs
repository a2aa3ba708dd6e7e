//! Worst-case errors in the Hermite space and node-only lower bounds.
//!
//! For a rule `Q` the squared worst-case error over the unit ball of the
//! Hermite space is `(1 - Σ w_j)² + Σ_{k≥1} r_α(k) (Σ_j w_j H_k(ξ_j))²`.
//! A lower bound valid for every weight vector comes from a bump function that
//! vanishes at all nodes: `I(h) / ‖h‖_α`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::legendre::integrate_gl32;
use crate::rule::{ExactSum, QuadratureRule};
use crate::spaces::r_alpha;
use crate::special::{erf_diff, gaussian_weight, zeta, ScaledHermiteIter, CRAMER_BOUND};

/// Nodes per parallel block; fixed so that sums do not depend on thread count.
const NODE_BLOCK: usize = 16;

/// Default series truncation for an `n`-point rule: `max(10⁴, 8n)`.
pub fn default_truncation(n: usize) -> usize {
    (8 * n).max(10_000)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WceEstimate {
    pub value: f64,
    pub truncation: usize,
    /// Upper bound on each omitted term `r_α(k) (Σ_j w_j H_k(ξ_j))²`, k > K.
    /// Reported, not added.
    pub tail_bound: f64,
    pub alpha: u32,
}

/// `w_j e^{ξ_j²/4}`, formed from `ln |w_j|` so that tiny outer weights survive.
fn folded_weights(rule: &QuadratureRule) -> Result<Vec<f64>> {
    rule.nodes()
        .iter()
        .zip(rule.ln_weights())
        .zip(rule.weights())
        .map(|((&x, &lw), &w)| {
            let e = lw + 0.25 * x * x;
            if e > 709.0 {
                return Err(Error::Overflow(format!(
                    "w e^(x^2/4) overflows at node {x}; the series needs a log-space path for this rule"
                )));
            }
            let sign = if w < 0.0 { -1.0 } else { 1.0 };
            Ok(sign * e.exp())
        })
        .collect()
}

/// `Σ_j w_j H_k(ξ_j)` for k = 0..=K.
pub fn hermite_moments(rule: &QuadratureRule, truncation: usize) -> Result<Vec<f64>> {
    let folded = folded_weights(rule)?;
    let nodes = rule.nodes();
    let blocks: Vec<Vec<f64>> = nodes
        .par_chunks(NODE_BLOCK)
        .zip(folded.par_chunks(NODE_BLOCK))
        .map(|(xs, ws)| {
            let mut acc = vec![0.0; truncation + 1];
            for (&x, &w) in xs.iter().zip(ws) {
                for (slot, h) in acc.iter_mut().zip(ScaledHermiteIter::new(x)) {
                    *slot += w * h;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; truncation + 1];
    for b in &blocks {
        for (t, v) in total.iter_mut().zip(b) {
            *t += v;
        }
    }
    Ok(total)
}

/// Hermite-series worst-case error truncated at degree `truncation`.
pub fn wce_series(rule: &QuadratureRule, alpha: u32, truncation: usize) -> Result<WceEstimate> {
    if truncation < 1 {
        return Err(invalid("wce_series: truncation must be at least 1"));
    }
    if alpha == 0 {
        return Err(invalid("wce_series: alpha must be positive"));
    }
    let moments = hermite_moments(rule, truncation)?;
    let bias = 1.0 - rule.weight_sum();
    let mut sq = bias * bias;
    for (k, m) in moments.iter().enumerate().skip(1) {
        sq += r_alpha(alpha, k) * m * m;
    }
    let abs_folded: f64 = folded_weights(rule)?.iter().map(|w| w.abs()).sum();
    let b = CRAMER_BOUND * abs_folded;
    Ok(WceEstimate {
        value: sq.sqrt(),
        truncation,
        tail_bound: r_alpha(alpha, truncation + 1) * b * b,
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpCertificate {
    pub i_h: f64,
    pub norm_h: f64,
    pub ratio: f64,
    pub alpha: u32,
    pub n: usize,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn falling(top: u32, count: u32) -> f64 {
    (0..count).map(|j| (top - j) as f64).product()
}

/// Coefficients of `d^τ/du^τ [u^α (1-u)^α] = Σ_ℓ c_ℓ u^{α+ℓ-τ}`.
fn bump_poly(alpha: u32, tau: u32) -> Vec<(f64, i32)> {
    (0..=alpha)
        .filter(|&l| alpha + l >= tau)
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binomial(alpha, l) * falling(alpha + l, tau);
            (c, (alpha + l - tau) as i32)
        })
        .collect()
}

fn eval_poly(poly: &[(f64, i32)], u: f64) -> f64 {
    poly.iter().map(|&(c, p)| c * u.powi(p)).sum()
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(invalid("bump certificate needs at least two nodes"));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(invalid("bump certificate: nodes must be finite"));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(
            "bump certificate: nodes must be strictly increasing (no duplicates)",
        ));
    }
    Ok(())
}

/// The bump `h(x)`: `u^α (1-u)^α` on each `[ξ_j, ξ_{j+1}]` with
/// `u = (x - ξ_j)/(ξ_{j+1} - ξ_j)`, zero outside the node range.
pub fn bump_value(nodes: &[f64], alpha: u32, x: f64) -> Result<f64> {
    check_nodes(nodes)?;
    let n = nodes.len();
    if x <= nodes[0] || x >= nodes[n - 1] {
        return Ok(0.0);
    }
    let j = nodes.partition_point(|&v| v <= x) - 1;
    let (a, b) = (nodes[j], nodes[j + 1]);
    let u = (x - a) / (b - a);
    Ok((u * (1.0 - u)).powi(alpha as i32))
}

/// `I(h) / ‖h‖_α` for the bump on `nodes`. Any rule on these nodes has
/// `Q(h) = 0`, so this bounds its worst-case error from below whatever the
/// weights are.
pub fn bump_certificate(nodes: &[f64], alpha: u32) -> Result<BumpCertificate> {
    if alpha == 0 {
        return Err(invalid("bump_certificate: alpha must be positive"));
    }
    check_nodes(nodes)?;
    let polys: Vec<Vec<(f64, i32)>> = (0..=alpha).map(|tau| bump_poly(alpha, tau)).collect();
    let mut integral = ExactSum::default();
    let mut norm_sq = ExactSum::default();
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let gap = b - a;
        integral.add(integrate_gl32(
            |x| {
                let u = (x - a) / gap;
                (u * (1.0 - u)).powi(alpha as i32) * gaussian_weight(x)
            },
            a,
            b,
        ));
        for (tau, poly) in polys.iter().enumerate() {
            let scale = gap.powi(-(tau as i32));
            norm_sq.add(integrate_gl32(
                |x| {
                    let v = scale * eval_poly(poly, (x - a) / gap);
                    v * v * gaussian_weight(x)
                },
                a,
                b,
            ));
        }
    }
    let i_h = integral.total();
    let norm_h = norm_sq.total().sqrt();
    if !(i_h > 0.0 && norm_h > 0.0) {
        return Err(invalid(format!(
            "bump certificate degenerated (I = {i_h}, norm = {norm_h})"
        )));
    }
    Ok(BumpCertificate {
        i_h,
        norm_h,
        ratio: i_h / norm_h,
        alpha,
        n: nodes.len(),
    })
}

/// Lower bound for any rule with no node in `(0, δ)`: the bump on `[0, δ]`.
pub fn gap_certificate(delta: f64, alpha: u32) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("gap_certificate: delta must lie in (0, 1], got {delta}")));
    }
    Ok(bump_certificate(&[0.0, delta], alpha)?.ratio)
}

fn factorial_big(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial_big(n: u32, k: u32) -> BigInt {
    factorial_big(n) / (factorial_big(k) * factorial_big(n - k))
}

/// `S_{α,τ} = ∫_0^1 |d^τ/dx^τ (x^α (1-x)^α)|² dx` as an exact rational.
pub fn s_alpha_tau_exact(alpha: u32, tau: u32) -> Result<BigRational> {
    if tau > alpha {
        return Err(invalid(format!("S_alpha_tau: tau {tau} exceeds alpha {alpha}")));
    }
    let mut total = BigRational::zero();
    for l1 in 0..=alpha {
        for l2 in 0..=alpha {
            let num = binomial_big(alpha, l1)
                * binomial_big(alpha, l2)
                * (factorial_big(alpha + l1) / factorial_big(alpha + l1 - tau))
                * (factorial_big(alpha + l2) / factorial_big(alpha + l2 - tau));
            let den = BigInt::from(2 * (alpha - tau) + l1 + l2 + 1);
            let term = BigRational::new(num, den);
            if (l1 + l2) % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    Ok(total)
}

pub fn s_alpha_tau(alpha: u32, tau: u32) -> Result<f64> {
    s_alpha_tau_exact(alpha, tau)?
        .to_f64()
        .ok_or_else(|| Error::Overflow(format!("S_alpha_tau({alpha}, {tau})")))
}

/// `c_α = (α!)² / ((2α+1)! (2π)^{1/4}) · (Σ_τ S_{α,τ})^{-1/2}`.
pub fn bump_norm_constant(alpha: u32) -> Result<f64> {
    if alpha == 0 {
        return Err(invalid("alpha must be positive"));
    }
    let s: BigRational = (0..=alpha)
        .map(|tau| s_alpha_tau_exact(alpha, tau))
        .sum::<Result<BigRational>>()?;
    let lead = BigRational::new(
        factorial_big(alpha) * factorial_big(alpha),
        factorial_big(2 * alpha + 1),
    );
    let lead = lead.to_f64().unwrap_or(f64::NAN);
    let s = s.to_f64().unwrap_or(f64::NAN);
    Ok(lead / (2.0 * std::f64::consts::PI).powf(0.25) / s.sqrt())
}

/// `C_α = c_α π^{1/4} (erf(13/3) - erf(3)) / 2^{(α+6)/2}`, the constant in
/// `e^wor(Q_n^GH) ≥ C_α n^{-α/2}`, valid for n ≥ 2.
pub fn explicit_lower_constant(alpha: u32) -> Result<f64> {
    let c = bump_norm_constant(alpha)?;
    Ok(c * std::f64::consts::PI.powf(0.25) * erf_diff(3.0, 13.0 / 3.0)
        / 2f64.powf((alpha as f64 + 6.0) / 2.0))
}

/// `2 √ζ(2α) / π^α`.
pub fn trap_theory_constant(alpha: u32) -> Result<f64> {
    if alpha == 0 {
        return Err(invalid("trap_theory_constant: alpha must be positive"));
    }
    Ok(2.0 * zeta(2.0 * alpha as f64)?.sqrt() / std::f64::consts::PI.powi(alpha as i32))
}
