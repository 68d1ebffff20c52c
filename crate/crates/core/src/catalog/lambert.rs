//! Principal branch of the Lambert W function, `W(x) e^{W(x)} = x`, `W ≥ -1`.
//!
//! The value comes from Halley iterations; the derivative from implicit
//! differentiation of the defining relation, `W'(x) = W / (x (1 + W))`.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `-1/e`, the branch point.
pub const BRANCH_POINT: f64 = -1.0 / E;

const MAX_ITER: usize = 64;
const STEP_TOL: f64 = 1e-14;

/// Principal-branch Lambert W.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(Error::Domain(format!(
            "lambert_w requires x >= -1/e, got {x}"
        )));
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let w0 = if x >= 0.0 { x.ln_1p() } else { x * E };
    Ok(halley(x, w0))
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let r = w * ew - x;
        if r == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            // Only reachable through rounding right at the branch point.
            w = -1.0 + 1e-300;
            continue;
        }
        let denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1);
        let mut step = r / denom;
        if !step.is_finite() {
            break;
        }
        // Stay on the principal branch.
        if w - step < -1.0 {
            step = 0.5 * (w + 1.0);
        }
        w -= step;
        if step.abs() <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// `dW/dx` at `x > -1/e`.
pub fn lambert_w_grad(x: f64) -> Result<f64> {
    if x.is_nan() || x <= BRANCH_POINT {
        return Err(Error::Domain(format!(
            "lambert_w_grad requires x > -1/e, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let w = lambert_w(x)?;
    Ok(w / (x * (1.0 + w)))
}

/// `W(e^y)` without forming `e^y`, which overflows for `y > 709`.
///
/// For large `y` this solves `w + ln w = y` by Newton's method.
pub fn lambert_w_exp(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y == f64::INFINITY {
        return f64::INFINITY;
    }
    if y < 20.0 {
        // e^y > 0 is always inside the principal domain.
        return lambert_w(y.exp()).unwrap_or(f64::NAN);
    }
    let mut w = y - y.ln();
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - y;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= STEP_TOL * w {
            break;
        }
    }
    w
}
