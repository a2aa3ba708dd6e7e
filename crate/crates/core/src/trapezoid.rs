//! Truncated trapezoidal rule `Q*_{n,T}(g) = (2T/n) Σ_{j<n} g(-T + 2Tj/n)`.
//!
//! For Gaussian integrals the rule is applied to `g = f ρ`. The cut-off grows
//! like `T = √(2/(1-ε) · α · ln n)`, or with `α` replaced by a slowly
//! increasing `γ(n)` when the smoothness is unknown.

use std::fmt;

use crate::adaptive::integrate_with_breaks;
use crate::error::{invalid, Result};
use crate::rule::{QuadratureRule, RuleKind, RuleParams};
use crate::spaces::{Integrand, INTEGRATION_RADIUS};
use crate::special::{gaussian_weight, hermite_eval};

pub const DEFAULT_EPSILON: f64 = 0.51;

/// Non-decreasing, unbounded growth function for the smoothness-free cut-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `max(ln ln n, 0)`.
    LogLog,
    /// A fixed value; reduces to the fixed-smoothness cut-off.
    Constant(f64),
}

impl Gamma {
    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            Gamma::LogLog => {
                if n <= 1.0 {
                    0.0
                } else {
                    n.ln().ln().max(0.0)
                }
            }
            Gamma::Constant(c) => c,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Gamma::LogLog => "loglog".to_string(),
            Gamma::Constant(c) => format!("const{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffVariant {
    FixedAlpha(u32),
    AlphaFree(Gamma),
}

/// How `T` is chosen from `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    pub variant: CutoffVariant,
    pub epsilon: f64,
}

impl CutoffPolicy {
    pub fn fixed(alpha: u32) -> Self {
        Self {
            variant: CutoffVariant::FixedAlpha(alpha),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn alpha_free(gamma: Gamma) -> Self {
        Self {
            variant: CutoffVariant::AlphaFree(gamma),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn cutoff(&self, n: usize) -> Result<f64> {
        match self.variant {
            CutoffVariant::FixedAlpha(alpha) => cutoff_t(n as f64, alpha, self.epsilon),
            CutoffVariant::AlphaFree(gamma) => {
                cutoff_t_alpha_free(n as f64, gamma, self.epsilon, None)
            }
        }
    }

    pub fn alpha(&self) -> Option<u32> {
        match self.variant {
            CutoffVariant::FixedAlpha(a) => Some(a),
            CutoffVariant::AlphaFree(_) => None,
        }
    }
}

impl fmt::Display for CutoffPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            CutoffVariant::FixedAlpha(a) => write!(f, "alpha={a},eps={}", self.epsilon),
            CutoffVariant::AlphaFree(g) => write!(f, "gamma={},eps={}", g.name(), self.epsilon),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// `T = √(2/(1-ε) · α · ln n)`. `n` is real so that non-integer
/// arguments can be probed; rules themselves use integer `n`.
pub fn cutoff_t(n: f64, alpha: u32, epsilon: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(invalid(format!("cutoff_t: n must be at least 2, got {n}")));
    }
    if alpha == 0 {
        return Err(invalid("cutoff_t: alpha must be positive"));
    }
    check_epsilon(epsilon)?;
    Ok((2.0 / (1.0 - epsilon) * alpha as f64 * n.ln()).sqrt())
}

/// `T̃ = √(2/(1-ε) · γ(n) · ln n)`. With `target_alpha`, `n` must be large
/// enough that `γ(n) ≥ α`.
pub fn cutoff_t_alpha_free(
    n: f64,
    gamma: Gamma,
    epsilon: f64,
    target_alpha: Option<u32>,
) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(invalid(format!(
            "cutoff_t_alpha_free: n must be at least 2, got {n}"
        )));
    }
    check_epsilon(epsilon)?;
    let g = gamma.eval(n);
    if !(g > 0.0) {
        return Err(invalid(format!(
            "cutoff_t_alpha_free: gamma({n}) = {g} is not positive"
        )));
    }
    if let Some(a) = target_alpha {
        if g < a as f64 {
            return Err(invalid(format!(
                "cutoff_t_alpha_free: gamma({n}) = {g:.4} is below the target smoothness {a}"
            )));
        }
    }
    Ok((2.0 / (1.0 - epsilon) * g * n.ln()).sqrt())
}

/// Nodes `-T + 2Tj/n`, `j = 0..n-1`, all weights `2T/n`. `+T` is not a node.
pub fn trap_rule(n: usize, t: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(invalid("trap_rule: n must be positive"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("trap_rule: T must be positive, got {t}")));
    }
    let h = 2.0 * t / n as f64;
    let nodes = (0..n).map(|j| -t + h * j as f64).collect();
    Ok(QuadratureRule::from_parts_unchecked(
        RuleKind::TruncatedTrapezoid,
        nodes,
        vec![h; n],
        RuleParams {
            cutoff: Some(t),
            alpha: None,
            epsilon: None,
        },
    ))
}

/// The rule `Q*_{n,T}` with `T` from `policy`.
pub fn trap_rule_for(n: usize, policy: &CutoffPolicy) -> Result<QuadratureRule> {
    let t = policy.cutoff(n)?;
    let mut rule = trap_rule(n, t)?;
    rule.set_params(RuleParams {
        cutoff: Some(t),
        alpha: policy.alpha(),
        epsilon: Some(policy.epsilon),
    });
    Ok(rule)
}

/// `Q*_{n,T}(f ρ)`.
pub fn integrate_gaussian<F: Fn(f64) -> f64>(n: usize, policy: &CutoffPolicy, f: F) -> Result<f64> {
    if n < 2 {
        return Err(invalid("integrate_gaussian: n must be at least 2"));
    }
    trap_rule_for(n, policy)?.apply(|x| f(x) * gaussian_weight(x))
}

/// `∫_{|x|>T} f ρ`, the part of the integral the truncated rule never sees.
pub fn truncation_tail(f: &Integrand, t: f64) -> Result<f64> {
    let r = INTEGRATION_RADIUS;
    if t >= r {
        return Ok(0.0);
    }
    let g = |x: f64| f.eval(x) * gaussian_weight(x);
    let right: Vec<f64> = f.panels(t, r);
    let left: Vec<f64> = f.panels(-r, -t);
    Ok(integrate_with_breaks(g, &left, 1e-15)? + integrate_with_breaks(g, &right, 1e-15)?)
}

/// `(f ρ)^{(τ)}(x)` by the Leibniz rule, with `ρ^{(ℓ)} = (-1)^ℓ √ℓ! H_ℓ ρ`.
pub fn weighted_derivative(f: &Integrand, tau: usize, x: f64) -> Result<f64> {
    let rho = gaussian_weight(x);
    let mut binom = 1.0;
    let mut sqrt_fact = 1.0;
    let mut total = 0.0;
    for l in 0..=tau {
        if l > 0 {
            binom = binom * (tau + 1 - l) as f64 / l as f64;
            sqrt_fact *= (l as f64).sqrt();
        }
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let rho_l = sign * sqrt_fact * hermite_eval(l, x) * rho;
        total += binom * f.derivative(tau - l, x)? * rho_l;
    }
    Ok(total)
}

/// `sup_{x, τ<α} e^{(1-ε)x²/2} |(f ρ)^{(τ)}(x)|`, sampled on a uniform grid
/// of spacing 1e-3 over `[-40, 40]`.
pub fn decay_norm(f: &Integrand, alpha: u32, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if alpha == 0 {
        return Err(invalid("decay_norm: alpha must be positive"));
    }
    let r = INTEGRATION_RADIUS;
    let steps = 80_000;
    let mut sup: f64 = 0.0;
    for i in 0..=steps {
        let x = -r + 2.0 * r * i as f64 / steps as f64;
        let w = ((1.0 - epsilon) * 0.5 * x * x).exp();
        for tau in 0..alpha as usize {
            let v = (w * weighted_derivative(f, tau, x)?).abs();
            if v.is_finite() {
                sup = sup.max(v);
            }
        }
    }
    Ok(sup)
}

/// `√2 M / √(α(1-ε)) · n^{-α} (ln n)^{-1/2}`, the bound on the truncation tail
/// when `T` follows the fixed-smoothness policy.
pub fn truncation_tail_bound(decay: f64, n: usize, alpha: u32, epsilon: f64) -> f64 {
    let nf = n as f64;
    2f64.sqrt() * decay / (alpha as f64 * (1.0 - epsilon)).sqrt()
        * nf.powi(-(alpha as i32))
        / nf.ln().sqrt()
}
