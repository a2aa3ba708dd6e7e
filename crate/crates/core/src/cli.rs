//! Command-line front end. Every verb prints CSV; exit status is 0 on
//! success, 1 on numeric failure and 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::gauss_hermite::{gh_rule, MAX_POINTS};
use crate::rule::{QuadratureRule, RuleKind};
use crate::study::{
    corpus_entry, corpus_labels, default_grid, fig1_study, fit_rate, write_fig1, write_fits,
    write_records, FitRecord, RuleFamily, SweepConfig,
};
use crate::trapezoid::{trap_rule, trap_rule_for, CutoffPolicy, DEFAULT_EPSILON};
use crate::wce::{
    bump_certificate, bump_norm_constant, default_truncation, explicit_lower_constant,
    gap_certificate, s_alpha_tau, trap_theory_constant, wce_series,
};

#[derive(Debug, Parser)]
#[command(name = "hermquad", version, about = "Gaussian-measure quadrature: Gauss-Hermite vs truncated trapezoid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Gh,
    Trap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepRuleArg {
    Gh,
    Trap,
    Both,
}

fn point_count(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n == 0 {
        return Err("must be at least 1".into());
    }
    Ok(n)
}

fn positive_int(s: &str) -> Result<u32, String> {
    let a: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if a == 0 {
        return Err("must be at least 1".into());
    }
    Ok(a)
}

fn epsilon(s: &str) -> Result<f64, String> {
    let e: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if e > 0.0 && e < 1.0 {
        Ok(e)
    } else {
        Err("must lie in (0, 1)".into())
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err("must be a positive finite number".into())
    }
}

/// Trapezoid cut-off: either an explicit `--T` or the policy from `--alpha`/`--epsilon`.
#[derive(Debug, Clone, clap::Args)]
pub struct CutoffArgs {
    /// Explicit cut-off T (trapezoid only)
    #[arg(long = "T", value_parser = positive_real, conflicts_with = "alpha")]
    pub t: Option<f64>,
    /// Smoothness α for the cut-off T = sqrt(2/(1-ε) α ln n)
    #[arg(long, value_parser = positive_int)]
    pub alpha: Option<u32>,
    /// ε in the cut-off
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = epsilon)]
    pub epsilon: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the nodes and weights of a rule as `j,node,weight` (j from 1)
    Nodes {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long, value_parser = point_count)]
        n: usize,
        #[command(flatten)]
        cutoff: CutoffArgs,
    },
    /// Apply a rule to a corpus integrand and compare with the exact integral
    Integrate {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long, value_parser = point_count)]
        n: usize,
        /// Corpus label, e.g. abs1, exp0.5, x4, sin
        #[arg(long)]
        integrand: String,
        #[command(flatten)]
        cutoff: CutoffArgs,
    },
    /// Error sweep over a grid of n (default: √2-geometric, 16..2048)
    Sweep {
        #[arg(long, value_enum, default_value = "both")]
        rule: SweepRuleArg,
        #[arg(long)]
        integrand: String,
        /// Comma-separated point counts
        #[arg(long, value_parser = point_count, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Smoothness for the trapezoid cut-off [default: the integrand's]
        #[arg(long, value_parser = positive_int)]
        alpha: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = epsilon)]
        epsilon: f64,
        /// Keep n as given instead of even n for GH and odd n for the trapezoid
        #[arg(long)]
        no_parity: bool,
        /// Print rate fits instead of the records
        #[arg(long)]
        fit: bool,
        /// Write to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hermite-series worst-case error of a rule
    Wce {
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// Comma-separated point counts
        #[arg(long, value_parser = point_count, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_parser = positive_int)]
        alpha: u32,
        /// Series truncation [default: max(10000, 8n)]
        #[arg(long = "K", value_parser = point_count)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = epsilon)]
        epsilon: f64,
    },
    /// Bump-function lower bounds on Gauss-Hermite nodes, or for a node-free gap
    Lowerbound {
        /// Comma-separated point counts (Gauss-Hermite nodes)
        #[arg(long, value_parser = point_count, value_delimiter = ',', required_unless_present = "delta")]
        n: Option<Vec<usize>>,
        /// Width of a node-free interval (0, δ), 0 < δ ≤ 1
        #[arg(long, value_parser = positive_real, conflicts_with = "n")]
        delta: Option<f64>,
        #[arg(long, value_parser = positive_int)]
        alpha: u32,
    },
    /// Lower-bound and trapezoid constants for α = 1..alpha-max
    Constants {
        #[arg(long, default_value_t = 5, value_parser = positive_int)]
        alpha_max: u32,
        /// Print the S_{α,τ} table instead
        #[arg(long)]
        s_table: bool,
    },
    /// Errors of both rules on |x|^p, p = 1, 3, 5, plus fitted slopes
    Fig1 {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numeric(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(e.into())
    }
}

type CliResult = std::result::Result<(), CliError>;

fn csv_out<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

fn build_rule(rule: RuleArg, n: usize, cutoff: &CutoffArgs) -> std::result::Result<QuadratureRule, CliError> {
    match rule {
        RuleArg::Gh => {
            if cutoff.t.is_some() || cutoff.alpha.is_some() {
                return Err(CliError::Usage("--T and --alpha apply to the trapezoid only".into()));
            }
            if n > MAX_POINTS {
                return Err(CliError::Usage(format!("--n must be at most {MAX_POINTS} for gh")));
            }
            Ok(gh_rule(n)?)
        }
        RuleArg::Trap => match (cutoff.t, cutoff.alpha) {
            (Some(t), _) => Ok(trap_rule(n, t)?),
            (None, Some(a)) => {
                if n < 2 {
                    return Err(CliError::Usage("--alpha cut-off needs n >= 2".into()));
                }
                Ok(trap_rule_for(n, &CutoffPolicy::fixed(a).with_epsilon(cutoff.epsilon))?)
            }
            (None, None) => Err(CliError::Usage("trap needs --T or --alpha".into())),
        },
    }
}

fn integrand(label: &str) -> std::result::Result<crate::spaces::Integrand, CliError> {
    corpus_entry(label).map_err(|_| {
        CliError::Usage(format!(
            "unknown integrand `{label}`; choose one of {}",
            corpus_labels().join(", ")
        ))
    })
}

#[derive(Serialize)]
struct IntegrateRow<'a> {
    rule: RuleKind,
    integrand: &'a str,
    n: usize,
    #[serde(rename = "T")]
    t: Option<f64>,
    value: f64,
    exact: f64,
    abs_error: f64,
}

#[derive(Serialize)]
struct WceRow {
    rule: RuleKind,
    n: usize,
    alpha: u32,
    #[serde(rename = "K")]
    k: usize,
    wce: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct BumpRow {
    n: usize,
    alpha: u32,
    #[serde(rename = "I_h")]
    i_h: f64,
    norm_h: f64,
    ratio: f64,
    explicit_bound: f64,
}

#[derive(Serialize)]
struct ConstantRow {
    alpha: u32,
    c_alpha: f64,
    lower_constant: f64,
    trap_constant: f64,
}

/// Executes a parsed command, writing its CSV to `out`.
pub fn execute<W: Write>(cmd: Command, out: &mut W) -> CliResult {
    match cmd {
        Command::Nodes { rule, n, cutoff } => {
            let r = build_rule(rule, n, &cutoff)?;
            let mut w = csv_out(out);
            w.write_record(["j", "node", "weight"])?;
            for (j, (&x, &wt)) in r.nodes().iter().zip(r.weights()).enumerate() {
                w.serialize((j + 1, x, wt))?;
            }
            w.flush()?;
        }
        Command::Integrate {
            rule,
            n,
            integrand: label,
            cutoff,
        } => {
            let f = integrand(&label)?;
            let r = build_rule(rule, n, &cutoff)?;
            let value = match rule {
                RuleArg::Gh => r.apply(|x| f.eval(x))?,
                RuleArg::Trap => r.apply(|x| f.eval(x) * crate::special::gaussian_weight(x))?,
            };
            let exact = f.exact_integral().unwrap_or(f64::NAN);
            let mut w = csv_out(out);
            w.write_record(["rule", "integrand", "n", "T", "value", "exact", "abs_error"])?;
            w.serialize(IntegrateRow {
                rule: r.kind(),
                integrand: f.label(),
                n,
                t: r.params().cutoff,
                value,
                exact,
                abs_error: (value - exact).abs(),
            })?;
            w.flush()?;
        }
        Command::Sweep {
            rule,
            integrand: label,
            ns,
            alpha,
            epsilon,
            no_parity,
            fit,
            out: path,
        } => {
            let f = integrand(&label)?;
            let ns = ns.unwrap_or_else(default_grid);
            if ns.iter().any(|&n| n < 2) {
                return Err(CliError::Usage("--ns entries must be at least 2".into()));
            }
            let config = SweepConfig {
                epsilon,
                enforce_parity: !no_parity,
                alpha,
            };
            let families = match rule {
                SweepRuleArg::Gh => vec![RuleFamily::GaussHermite],
                SweepRuleArg::Trap => vec![RuleFamily::Trapezoid],
                SweepRuleArg::Both => vec![RuleFamily::GaussHermite, RuleFamily::Trapezoid],
            };
            let mut records = Vec::new();
            let mut fits = Vec::new();
            for fam in families {
                let recs = crate::study::run_sweep(fam, &f, &ns, &config)?;
                if fit {
                    fits.push(FitRecord::new(fam.kind(), f.label(), &fit_rate(&recs)?));
                }
                records.extend(recs);
            }
            let mut buf = Vec::new();
            if fit {
                write_fits(&fits, &mut buf)?;
            } else {
                write_records(&records, &mut buf)?;
            }
            match path {
                Some(p) => std::fs::write(p, buf)?,
                None => out.write_all(&buf)?,
            }
        }
        Command::Wce {
            rule,
            n,
            alpha,
            k,
            epsilon,
        } => {
            let mut w = csv_out(out);
            w.write_record(["rule", "n", "alpha", "K", "wce", "tail_bound"])?;
            for &n in &n {
                let cutoff = CutoffArgs {
                    t: None,
                    alpha: (rule == RuleArg::Trap).then_some(alpha),
                    epsilon,
                };
                let r = build_rule(rule, n, &cutoff)?;
                let est = wce_series(&r, alpha, k.unwrap_or_else(|| default_truncation(n)))?;
                w.serialize(WceRow {
                    rule: r.kind(),
                    n,
                    alpha,
                    k: est.truncation,
                    wce: est.value,
                    tail_bound: est.tail_bound,
                })?;
            }
            w.flush()?;
        }
        Command::Lowerbound { n, delta, alpha } => {
            let mut w = csv_out(out);
            if let Some(d) = delta {
                if d > 1.0 {
                    return Err(CliError::Usage("--delta must lie in (0, 1]".into()));
                }
                w.write_record(["delta", "alpha", "certificate"])?;
                w.serialize((d, alpha, gap_certificate(d, alpha)?))?;
            } else {
                let c = explicit_lower_constant(alpha)?;
                w.write_record(["n", "alpha", "I_h", "norm_h", "ratio", "explicit_bound"])?;
                for n in n.unwrap_or_default() {
                    if !(2..=MAX_POINTS).contains(&n) {
                        return Err(CliError::Usage(format!("--n entries must lie in 2..={MAX_POINTS}")));
                    }
                    let cert = bump_certificate(gh_rule(n)?.nodes(), alpha)?;
                    w.serialize(BumpRow {
                        n,
                        alpha,
                        i_h: cert.i_h,
                        norm_h: cert.norm_h,
                        ratio: cert.ratio,
                        explicit_bound: c * (n as f64).powf(-(alpha as f64) / 2.0),
                    })?;
                }
            }
            w.flush()?;
        }
        Command::Constants { alpha_max, s_table } => {
            let mut w = csv_out(out);
            if s_table {
                w.write_record(["alpha", "tau", "S"])?;
                for a in 1..=alpha_max {
                    for tau in 0..=a {
                        w.serialize((a, tau, s_alpha_tau(a, tau)?))?;
                    }
                }
            } else {
                w.write_record(["alpha", "c_alpha", "lower_constant", "trap_constant"])?;
                for a in 1..=alpha_max {
                    w.serialize(ConstantRow {
                        alpha: a,
                        c_alpha: bump_norm_constant(a)?,
                        lower_constant: explicit_lower_constant(a)?,
                        trap_constant: trap_theory_constant(a)?,
                    })?;
                }
            }
            w.flush()?;
        }
        Command::Fig1 { out: dir } => {
            let study = fig1_study()?;
            write_fig1(&study, &dir)?;
            write_fits(&study.fits, &mut *out)?;
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
