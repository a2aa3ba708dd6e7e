//! Adaptive Gauss-Kronrod (7/15) integration by recursive bisection.
//!
//! This is the reference integrator behind Sobolev norms, Hermite
//! coefficients and the independent oracles in the test-suite.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;
/// Panel evaluations allowed per call before giving up.
const MAX_PANELS: usize = 2_000_000;

struct Panel {
    kronrod: f64,
    gauss: f64,
    abs_kronrod: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { node: x, value: v })
        }
    };
    let fc = eval(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_kronrod = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = eval(c - dx)?;
        let f2 = eval(c + dx)?;
        kronrod += WGK[i] * (f1 + f2);
        abs_kronrod += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        kronrod: kronrod * h,
        gauss: gauss * h,
        abs_kronrod: abs_kronrod * h.abs(),
    })
}

fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> Result<f64> {
    if *budget == 0 {
        return Err(Error::NoConvergence {
            what: "adaptive Gauss-Kronrod integration (panel budget)",
            iterations: MAX_PANELS,
        });
    }
    *budget -= 1;
    let p = gk15(f, a, b)?;
    let err = (p.kronrod - p.gauss).abs();
    if err <= tol || err <= 1e-15 * p.abs_kronrod || (b - a).abs() < 1e-14 * a.abs().max(1.0) {
        return Ok(p.kronrod);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NoConvergence {
            what: "adaptive Gauss-Kronrod integration",
            iterations: depth as usize,
        });
    }
    let m = 0.5 * (a + b);
    let left = recurse(f, a, m, 0.5 * tol, depth + 1, budget)?;
    Ok(left + recurse(f, m, b, 0.5 * tol, depth + 1, budget)?)
}

const INITIAL_PANELS: usize = 16;

/// Integrates `f` over `[a, b]` to an absolute tolerance. The interval is
/// first cut into 16 equal panels so that narrow peaks are not missed.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let points: Vec<f64> = (0..=INITIAL_PANELS)
        .map(|i| if i == INITIAL_PANELS { b } else { a + h * i as f64 })
        .collect();
    integrate_with_breaks(f, &points, abs_tol)
}

/// Integrates over consecutive panels `[p_0, p_1], [p_1, p_2], ...`, splitting
/// the tolerance evenly. Use this to put kinks on panel boundaries.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], abs_tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let tol = abs_tol / (points.len() - 1) as f64;
    let mut budget = MAX_PANELS;
    points
        .windows(2)
        .map(|w| recurse(&f, w[0], w[1], tol, 0, &mut budget))
        .sum()
}
