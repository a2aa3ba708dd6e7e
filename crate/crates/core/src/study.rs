//! Integrand corpus, convergence sweeps, log-log rate fits and CSV output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss_hermite::gh_rule;
use crate::rule::RuleKind;
use crate::spaces::{Integrand, RealFn};
use crate::special::{gaussian_abs_moment, gaussian_weight};
use crate::trapezoid::{trap_rule_for, CutoffPolicy, DEFAULT_EPSILON};

/// Errors at or below this level are treated as rounding noise and left out of fits.
pub const ERROR_FLOOR: f64 = 1e-15;

/// Smoothness declared for the smooth controls in the corpus.
pub const SMOOTH_ALPHA: u32 = 2;

/// Exponents of the `|x|^p` targets.
pub const FIG1_POWERS: [u32; 3] = [1, 3, 5];

fn abs_power(p: u32) -> Result<Integrand> {
    let pi = p as i32;
    let derivs = (1..=pi)
        .map(|tau| {
            let c: f64 = (0..tau).map(|j| (pi - j) as f64).product();
            Arc::new(move |x: f64| c * x.abs().powi(pi - tau) * x.signum().powi(tau)) as RealFn
        })
        .collect();
    Ok(Integrand::new(format!("abs{p}"), p, move |x| x.abs().powi(pi))
        .with_derivs(derivs)?
        .with_breakpoints(vec![0.0])
        .with_exact_integral(gaussian_abs_moment(p as f64)?))
}

fn exponential(t: f64, label: &str) -> Result<Integrand> {
    let derivs = (1..=3)
        .map(|o| Arc::new(move |x: f64| t.powi(o) * (t * x).exp()) as RealFn)
        .collect();
    Ok(Integrand::new(label, SMOOTH_ALPHA, move |x| (t * x).exp())
        .with_derivs(derivs)?
        .with_exact_integral((0.5 * t * t).exp()))
}

fn monomial(d: i32) -> Result<Integrand> {
    let derivs = (1..=3)
        .map(|tau| {
            let c: f64 = (0..tau).map(|j| (d - j) as f64).product();
            Arc::new(move |x: f64| if tau > d { 0.0 } else { c * x.powi(d - tau) }) as RealFn
        })
        .collect();
    let exact = if d % 2 == 1 {
        0.0
    } else {
        (1..d).step_by(2).map(|k| k as f64).product()
    };
    Ok(Integrand::new(format!("x{d}"), SMOOTH_ALPHA, move |x| x.powi(d))
        .with_derivs(derivs)?
        .with_exact_integral(exact))
}

fn sine() -> Result<Integrand> {
    let derivs: Vec<RealFn> = vec![
        Arc::new(f64::cos),
        Arc::new(|x: f64| -x.sin()),
        Arc::new(|x: f64| -x.cos()),
    ];
    Ok(Integrand::new("sin", SMOOTH_ALPHA, f64::sin)
        .with_derivs(derivs)?
        .with_exact_integral(0.0))
}

/// Test functions with closed-form Gaussian integrals: `abs1, abs3, abs5`
/// (smoothness p), `exp0.5, exp1`, `x0 .. x8` and `sin`.
pub fn corpus() -> Result<Vec<Integrand>> {
    let mut out = Vec::new();
    for p in FIG1_POWERS {
        out.push(abs_power(p)?);
    }
    out.push(exponential(0.5, "exp0.5")?);
    out.push(exponential(1.0, "exp1")?);
    for d in 0..=8 {
        out.push(monomial(d)?);
    }
    out.push(sine()?);
    Ok(out)
}

pub fn corpus_entry(label: &str) -> Result<Integrand> {
    corpus()?
        .into_iter()
        .find(|f| f.label() == label)
        .ok_or_else(|| invalid(format!("unknown integrand `{label}`")))
}

pub fn corpus_labels() -> Vec<String> {
    corpus()
        .map(|c| c.iter().map(|f| f.label().to_string()).collect())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleFamily {
    GaussHermite,
    Trapezoid,
}

impl RuleFamily {
    pub fn kind(self) -> RuleKind {
        match self {
            RuleFamily::GaussHermite => RuleKind::GaussHermite,
            RuleFamily::Trapezoid => RuleKind::TruncatedTrapezoid,
        }
    }

    /// Even n for Gauss-Hermite, odd n for the trapezoid, so neither rule
    /// puts a node at the origin.
    pub fn coerce_parity(self, n: usize) -> usize {
        match self {
            RuleFamily::GaussHermite if n % 2 == 1 => n + 1,
            RuleFamily::Trapezoid if n % 2 == 0 => {
                if n > 2 {
                    n - 1
                } else {
                    n + 1
                }
            }
            _ => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub epsilon: f64,
    pub enforce_parity: bool,
    /// Smoothness used for the trapezoid cut-off; defaults to the integrand's.
    pub alpha: Option<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            enforce_parity: true,
            alpha: None,
        }
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub rule: RuleKind,
    pub integrand: String,
    pub n: usize,
    pub alpha: u32,
    pub epsilon: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub abs_error: f64,
}

fn sweep_point(
    family: RuleFamily,
    f: &Integrand,
    exact: f64,
    n: usize,
    alpha: u32,
    epsilon: f64,
) -> Result<ConvergenceRecord> {
    let (q, t, eps) = match family {
        RuleFamily::GaussHermite => (gh_rule(n)?.apply(|x| f.eval(x))?, None, None),
        RuleFamily::Trapezoid => {
            let policy = CutoffPolicy::fixed(alpha).with_epsilon(epsilon);
            let rule = trap_rule_for(n, &policy)?;
            let q = rule.apply(|x| f.eval(x) * gaussian_weight(x))?;
            (q, rule.params().cutoff, Some(epsilon))
        }
    };
    Ok(ConvergenceRecord {
        rule: family.kind(),
        integrand: f.label().to_string(),
        n,
        alpha,
        epsilon: eps,
        t,
        abs_error: (q - exact).abs(),
    })
}

/// Errors of one rule family on `f` for every n in `ns`, in ascending n.
/// Rows are computed in parallel; the output order does not depend on
/// scheduling.
pub fn run_sweep(
    family: RuleFamily,
    f: &Integrand,
    ns: &[usize],
    config: &SweepConfig,
) -> Result<Vec<ConvergenceRecord>> {
    if ns.is_empty() {
        return Err(invalid("run_sweep: no point counts given"));
    }
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(invalid(format!("run_sweep: n must be at least 2, got {bad}")));
    }
    let exact = f
        .exact_integral()
        .ok_or_else(|| invalid(format!("`{}` has no reference integral", f.label())))?;
    let alpha = config.alpha.unwrap_or(f.alpha());
    let mut grid: Vec<usize> = ns
        .iter()
        .map(|&n| if config.enforce_parity { family.coerce_parity(n) } else { n })
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid.par_iter()
        .map(|&n| {
            sweep_point(family, f, exact, n, alpha, config.epsilon).map_err(|e| Error::Sweep {
                rule: family.kind(),
                n,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Geometric grid with ratio √2 from `lo` to `hi`, rounded to integers.
pub fn geometric_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let v = (lo as f64 * 2f64.sqrt().powi(i)).round() as usize;
        if v > hi {
            break;
        }
        out.push(v);
        i += 1;
    }
    out
}

/// The default sweep grid, 16 to 2048 before parity coercion.
pub fn default_grid() -> Vec<usize> {
    geometric_grid(16, 2048)
}

/// Least-squares line through `(log10 n, log10 error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub rows: usize,
}

/// Fit over `(n, value)` pairs, skipping values at or below [`ERROR_FLOOR`].
pub fn fit_points(points: &[(usize, f64)]) -> Result<RateFit> {
    let usable: Vec<(usize, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, e)| e > ERROR_FLOOR && e.is_finite())
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            required: 3,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|p| (p.0 as f64).log10()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1.log10()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit needs at least two distinct n"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        n_min: usable.iter().map(|p| p.0).min().unwrap_or(0),
        n_max: usable.iter().map(|p| p.0).max().unwrap_or(0),
        rows: usable.len(),
    })
}

pub fn fit_rate(records: &[ConvergenceRecord]) -> Result<RateFit> {
    let pts: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.abs_error)).collect();
    fit_points(&pts)
}

/// One row of the fit CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub rule: RuleKind,
    pub integrand: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl FitRecord {
    pub fn new(rule: RuleKind, integrand: &str, fit: &RateFit) -> Self {
        Self {
            rule,
            integrand: integrand.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            n_min: fit.n_min,
            n_max: fit.n_max,
        }
    }
}

const RECORD_HEADER: [&str; 7] = ["rule", "integrand", "n", "alpha", "epsilon", "T", "abs_error"];
const FIT_HEADER: [&str; 7] = ["rule", "integrand", "slope", "intercept", "r_squared", "n_min", "n_max"];

fn write_rows<T: Serialize, W: Write>(rows: &[T], header: &[&str], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records sorted by (rule, integrand, n).
pub fn write_records<W: Write>(records: &[ConvergenceRecord], out: W) -> Result<()> {
    let mut rows = records.to_vec();
    rows.sort_by(|a, b| (a.rule, &a.integrand, a.n).cmp(&(b.rule, &b.integrand, b.n)));
    write_rows(&rows, &RECORD_HEADER, out)
}

/// Writes fits sorted by (rule, integrand).
pub fn write_fits<W: Write>(fits: &[FitRecord], out: W) -> Result<()> {
    let mut rows = fits.to_vec();
    rows.sort_by(|a, b| (a.rule, &a.integrand).cmp(&(b.rule, &b.integrand)));
    write_rows(&rows, &FIT_HEADER, out)
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(input: R, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(invalid(format!(
            "unexpected CSV header {got:?}, expected {header:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ConvergenceRecord>> {
    read_rows(input, &RECORD_HEADER)
}

pub fn read_fits<R: Read>(input: R) -> Result<Vec<FitRecord>> {
    read_rows(input, &FIT_HEADER)
}

pub fn emit_records_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    write_records(records, File::create(path)?)
}

pub fn emit_fits_csv(fits: &[FitRecord], path: &Path) -> Result<()> {
    write_fits(fits, File::create(path)?)
}

pub fn load_records_csv(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    read_records(File::open(path)?)
}

pub fn load_fits_csv(path: &Path) -> Result<Vec<FitRecord>> {
    read_fits(File::open(path)?)
}

/// Both rules on `|x|^p`, p ∈ {1, 3, 5}, over the default grid.
#[derive(Debug, Clone)]
pub struct Fig1Study {
    pub panels: Vec<(u32, Vec<ConvergenceRecord>)>,
    pub fits: Vec<FitRecord>,
}

pub fn fig1_study() -> Result<Fig1Study> {
    let grid = default_grid();
    let config = SweepConfig::default();
    let mut panels = Vec::new();
    let mut fits = Vec::new();
    for p in FIG1_POWERS {
        let f = abs_power(p)?;
        let mut rows = Vec::new();
        for family in [RuleFamily::GaussHermite, RuleFamily::Trapezoid] {
            let recs = run_sweep(family, &f, &grid, &config)?;
            // A family whose errors all sit on the floor has no fit row.
            if let Ok(fit) = fit_rate(&recs) {
                fits.push(FitRecord::new(family.kind(), f.label(), &fit));
            }
            rows.extend(recs);
        }
        panels.push((p, rows));
    }
    Ok(Fig1Study { panels, fits })
}

/// Writes `fig1_p{1,3,5}.csv` and `fig1_fits.csv` into `dir`.
pub fn write_fig1(study: &Fig1Study, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (p, rows) in &study.panels {
        emit_records_csv(rows, &dir.join(format!("fig1_p{p}.csv")))?;
    }
    emit_fits_csv(&study.fits, &dir.join("fig1_fits.csv"))
}
