//! Gauss-Hermite rules for the standard Gaussian measure.
//!
//! Nodes are the zeros of `H_n`. Initial guesses come from the eigenvalues
//! of the Jacobi matrix (zero diagonal, off-diagonal `√1, ..., √(n-1)`),
//! which are then polished by Newton's method on the three-term recurrence.
//! Weights are `w_j = 1 / H_n'(ξ_j)² = 1 / (n H_{n-1}(ξ_j)²)`, formed in log
//! space so that large rules do not overflow.

use crate::error::{invalid, Error, Result};
use crate::rule::{QuadratureRule, RuleKind, RuleParams};
use crate::special::{hermite_log_abs, hermite_rescaled};

/// Largest supported rule size.
pub const MAX_POINTS: usize = 4096;

const NEWTON_MAX_ITER: usize = 200;

/// Builds the `n`-point Gauss-Hermite rule.
pub fn gh_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_POINTS {
        return Err(invalid(format!(
            "gh_rule: n must lie in 1..={MAX_POINTS}, got {n}"
        )));
    }
    let nodes = gh_nodes(n)?;
    let ln_n = (n as f64).ln();
    let ln_weights = nodes
        .iter()
        .map(|&x| -ln_n - 2.0 * hermite_log_abs(n - 1, x).0)
        .collect();
    Ok(QuadratureRule::from_log_weights(
        RuleKind::GaussHermite,
        nodes,
        ln_weights,
        RuleParams::default(),
    ))
}

fn gh_nodes(n: usize) -> Result<Vec<f64>> {
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);

    let mut nodes = diag
        .into_iter()
        .map(|guess| newton_polish(n, guess))
        .collect::<Result<Vec<_>>>()?;

    // Exact symmetry: ξ_j = -ξ_{n+1-j}, middle node of odd n at 0.
    for j in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - j] - nodes[j]);
        nodes[j] = -m;
        nodes[n - 1 - j] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NoConvergence {
            what: "Gauss-Hermite node separation",
            iterations: NEWTON_MAX_ITER,
        });
    }
    Ok(nodes)
}

fn newton_polish(n: usize, mut x: f64) -> Result<f64> {
    let sqrt_n = (n as f64).sqrt();
    let mut last_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let p = hermite_rescaled(n, x);
        if p.cur == 0.0 {
            return Ok(x);
        }
        // H_n / H_n' with the common scale cancelled.
        let step = p.cur / (sqrt_n * p.prev);
        x -= step;
        let scale = x.abs().max(1.0);
        if step.abs() < 1e-15 * scale {
            return Ok(x);
        }
        // Stagnation at rounding level.
        if step.abs() >= last_step && step.abs() < 1e-12 * scale {
            return Ok(x);
        }
        last_step = step.abs();
    }
    Err(Error::NoConvergence {
        what: "Gauss-Hermite Newton refinement",
        iterations: NEWTON_MAX_ITER,
    })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson-type shifts. `diag` is overwritten with the eigenvalues
/// (unsorted); `off[i]` couples rows `i` and `i + 1`, and `off[n-1]` is scratch.
pub(crate) fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence {
                    what: "tridiagonal QL eigenvalue iteration",
                    iterations: iter,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::hermite_eval;

    fn double_factorial_odd(d: u32) -> f64 {
        // (d-1)!! for even d
        (1..d).step_by(2).map(|k| k as f64).product()
    }

    #[test]
    fn hand_derived_rules() {
        let r = gh_rule(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_eq!(r.weights(), &[1.0]);

        let r = gh_rule(2).unwrap();
        for (got, want) in r.nodes().iter().zip([-1.0, 1.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        for w in r.weights() {
            assert!((w - 0.5).abs() < 1e-13);
        }

        let r = gh_rule(3).unwrap();
        let s3 = 3f64.sqrt();
        for (got, want) in r.nodes().iter().zip([-s3, 0.0, s3]) {
            assert!((got - want).abs() < 1e-13);
        }
        for (got, want) in r.weights().iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(gh_rule(0).is_err());
        assert!(gh_rule(MAX_POINTS + 1).is_err());
    }

    #[test]
    fn apply_examples() {
        let r3 = gh_rule(3).unwrap();
        assert!((r3.apply(|x| x.powi(4)).unwrap() - 3.0).abs() < 1e-13);
        assert_eq!(gh_rule(2).unwrap().apply(|x| x).unwrap(), 0.0);
        assert_eq!(gh_rule(1).unwrap().apply(|_| 4.25).unwrap(), 4.25);
    }

    #[test]
    fn spacing_examples() {
        let s = gh_rule(2).unwrap().spacing_stats().unwrap();
        assert!((s.min_gap - 2.0).abs() < 1e-13 && (s.max_gap - 2.0).abs() < 1e-13);
        let s = gh_rule(3).unwrap().spacing_stats().unwrap();
        assert!((s.min_gap - 3f64.sqrt()).abs() < 1e-13);
        assert!((s.max_gap - 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn polynomial_exactness() {
        for n in 1..=30 {
            let r = gh_rule(n).unwrap();
            for d in 0..=(2 * n as u32 - 1) {
                let q = r.apply(|x| x.powi(d as i32)).unwrap();
                if d % 2 == 1 {
                    assert!(q.abs() < 1e-12, "n={n} d={d}: {q}");
                } else {
                    let exact = double_factorial_odd(d);
                    assert!((q - exact).abs() <= 1e-10 * exact, "n={n} d={d}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn nodes_are_roots() {
        for n in [5usize, 40, 200, 1000] {
            let r = gh_rule(n).unwrap();
            for &x in r.nodes() {
                let p = hermite_rescaled(n, x);
                // Newton step size bounds the distance to the true root.
                let dist = (p.cur / ((n as f64).sqrt() * p.prev)).abs();
                assert!(dist < 1e-13, "n={n} x={x} dist={dist}");
            }
        }
    }

    #[test]
    fn orthonormality_with_64_points() {
        let r = gh_rule(64).unwrap();
        for j in 0..=20 {
            for k in 0..=20 {
                let v = r.apply(|x| hermite_eval(j, x) * hermite_eval(k, x)).unwrap();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10, "j={j} k={k}: {v}");
            }
        }
    }

    #[test]
    fn structural_invariants_sample() {
        for n in [2usize, 7, 10, 64, 255, 500, 2048] {
            let r = gh_rule(n).unwrap();
            let x = r.nodes();
            for j in 0..n {
                assert_eq!(x[j], -x[n - 1 - j]);
            }
            assert!(r.ln_weights().iter().all(|l| l.is_finite()));
            assert!(r.weights().iter().all(|&w| w >= 0.0));
            assert!((r.weight_sum() - 1.0).abs() < 1e-13, "n={n}: {}", r.weight_sum());
            let s = r.spacing_stats().unwrap();
            let h = (n as f64 + 0.5).sqrt();
            assert!(std::f64::consts::PI / h < s.min_gap && s.min_gap <= (10.5f64).sqrt() / h);
        }
    }

    #[test]
    fn node_location_bounds() {
        for n in 2..=500usize {
            let r = gh_rule(n).unwrap();
            let x = r.nodes();
            let s = (n as f64 + 0.5).sqrt();
            let pi = std::f64::consts::PI;
            let gaps = r.spacing_stats().unwrap();
            assert!(pi / s < gaps.min_gap && gaps.min_gap <= 10.5f64.sqrt() / s, "n={n}");
            if n % 2 == 1 {
                let m = n / 2;
                assert_eq!(x[m], 0.0);
                for j in 1..=(n - 1) / 2 {
                    let v = x[m + j];
                    assert!(j as f64 * pi / s < v && v < (4 * j + 3) as f64 / s, "n={n} j={j}");
                }
            } else {
                for j in 1..=n / 2 {
                    let v = x[n / 2 + j - 1];
                    assert!((j as f64 - 0.5) * pi / s < v && v < (4 * j + 1) as f64 / s, "n={n} j={j}");
                }
            }
            assert!(x[n - 1] <= (2 * n + 1) as f64 / s);
        }
    }

    #[test]
    fn tridiagonal_qr_small() {
        // [[2,1],[1,2]] -> 1, 3
        let mut d = vec![2.0, 2.0];
        let mut e = vec![1.0, 0.0];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(f64::total_cmp);
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 3.0).abs() < 1e-15);
    }
}
