//! Adaptive Simpson quadrature for the closed-form verification targets.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

fn eval(f: &impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Numeric(format!(
            "integrand is not finite at x = {x}"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numeric(format!(
            "quadrature did not converge on [{a}, {b}]"
        )));
    }
    let l = step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance
/// `tol` with adaptive interval-halving Simpson rules.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(
            "quadrature needs finite bounds and a positive tolerance".to_string(),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-adaptive_simpson(f, b, a, tol)?);
    }
    let m = 0.5 * (a + b);
    let fa = eval(&f, a)?;
    let fm = eval(&f, m)?;
    let fb = eval(&f, b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 0)
}
