//! Node/weight sets shared by every rule family.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    #[serde(rename = "gh")]
    GaussHermite,
    #[serde(rename = "trap")]
    TruncatedTrapezoid,
    /// User-supplied nodes and weights.
    Custom,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::GaussHermite => "gh",
            RuleKind::TruncatedTrapezoid => "trap",
            RuleKind::Custom => "custom",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance of a rule: cut-off, smoothness and ε it was built for.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RuleParams {
    pub cutoff: Option<f64>,
    pub alpha: Option<u32>,
    pub epsilon: Option<f64>,
}

/// `Q(f) = Σ_j w_j f(ξ_j)` with strictly increasing nodes.
///
/// `ln_weights` holds `ln |w_j|`; for wide Gauss-Hermite rules the outer
/// weights underflow to zero in f64 while their logarithms stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ln_weights: Vec<f64>,
    params: RuleParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingStats {
    pub min_gap: f64,
    pub max_gap: f64,
}

impl QuadratureRule {
    pub(crate) fn from_log_weights(
        kind: RuleKind,
        nodes: Vec<f64>,
        ln_weights: Vec<f64>,
        params: RuleParams,
    ) -> Self {
        let weights = ln_weights.iter().map(|l| l.exp()).collect();
        Self {
            kind,
            nodes,
            weights,
            ln_weights,
            params,
        }
    }

    pub(crate) fn from_parts_unchecked(
        kind: RuleKind,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        params: RuleParams,
    ) -> Self {
        let ln_weights = weights.iter().map(|w| w.abs().ln()).collect();
        Self {
            kind,
            nodes,
            weights,
            ln_weights,
            params,
        }
    }

    /// A custom rule from arbitrary weights on strictly increasing, finite nodes.
    pub fn custom(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(invalid(format!(
                "custom rule needs equal, non-zero numbers of nodes and weights ({} vs {})",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(invalid("custom rule: nodes and weights must be finite"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("custom rule: nodes must be strictly increasing"));
        }
        Ok(Self::from_parts_unchecked(
            RuleKind::Custom,
            nodes,
            weights,
            RuleParams::default(),
        ))
    }

    /// Same nodes, different weights. The result is a [`RuleKind::Custom`] rule.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::custom(self.nodes.clone(), weights)
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    pub fn params(&self) -> RuleParams {
        self.params
    }

    pub(crate) fn set_params(&mut self, params: RuleParams) {
        self.params = params;
    }

    /// Sum of the weights, exactly rounded.
    pub fn weight_sum(&self) -> f64 {
        exact_sum(self.weights.iter().copied())
    }

    /// `Σ_j w_j f(ξ_j)`, summed exactly and rounded once. Non-finite values abort
    /// with the node where they occurred.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut acc = ExactSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { node: x, value: v });
            }
            acc.add(w * v);
        }
        Ok(acc.total())
    }

    /// Smallest and largest gap between adjacent nodes.
    pub fn spacing_stats(&self) -> Result<SpacingStats> {
        if self.nodes.len() < 2 {
            return Err(invalid("spacing_stats needs at least two nodes"));
        }
        let (min_gap, max_gap) = self
            .nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
                (lo.min(g), hi.max(g))
            });
        Ok(SpacingStats { min_gap, max_gap })
    }
}

/// Running sum with Shewchuk's non-overlapping partials: the total is the
/// correctly rounded value of the exact sum, so exactly cancelling terms give 0.
#[derive(Debug, Default, Clone)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn total(&self) -> f64 {
        let p = &self.partials;
        let Some(mut k) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[k];
        let mut lo = 0.0;
        while k > 0 {
            k -= 1;
            let x = hi;
            let y = p[k];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round-half-even correction across the last two partials.
        if k > 0 && ((lo < 0.0 && p[k - 1] < 0.0) || (lo > 0.0 && p[k - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_rule_validation() {
        assert!(QuadratureRule::custom(vec![], vec![]).is_err());
        assert!(QuadratureRule::custom(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(QuadratureRule::custom(vec![0.0, 1.0], vec![1.0]).is_err());
        let r = QuadratureRule::custom(vec![-1.0, 2.0], vec![0.5, -0.25]).unwrap();
        assert_eq!(r.kind(), RuleKind::Custom);
        assert_eq!(r.apply(|x| x).unwrap(), -1.0);
    }

    #[test]
    fn apply_reports_offending_node() {
        let r = QuadratureRule::custom(vec![-1.0, 0.0, 1.0], vec![1.0; 3]).unwrap();
        match r.apply(|x| 1.0 / x) {
            Err(Error::NonFinite { node, .. }) => assert_eq!(node, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spacing_needs_two_nodes() {
        let r = QuadratureRule::custom(vec![0.0], vec![1.0]).unwrap();
        assert!(r.spacing_stats().is_err());
    }

    #[test]
    fn exact_summation() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(exact_sum(v), 2.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1e22, 3.0, -1e22, -3.0]), 0.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }
}
