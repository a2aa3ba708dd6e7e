//! Quadrature against the standard Gaussian measure: Gauss-Hermite rules,
//! the truncated trapezoidal rule, worst-case-error estimates and lower-bound
//! certificates in Gaussian-weighted Sobolev spaces, and a small convergence
//! study engine.

pub mod adaptive;
pub mod cli;
pub mod error;
pub mod gauss_hermite;
pub mod legendre;
pub mod rule;
pub mod spaces;
pub mod special;
pub mod study;
pub mod trapezoid;
pub mod wce;

pub use error::{Error, Result};
pub use gauss_hermite::gh_rule;
pub use rule::{QuadratureRule, RuleKind, RuleParams, SpacingStats};
