//! Principal branch of the Lambert W function on the nonnegative reals.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 50;

/// Principal branch `W(x)` for `x >= 0`, the solution of `W e^W = x`.
///
/// Halley iteration on `w e^w - x` from the usual `ln(1 + x)` / asymptotic
/// initial guess. Converges in a handful of steps over the whole range.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "lambert_w argument",
            value: x,
            allowed: "[0, inf)".into(),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let residual = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * residual / (2.0 * wp1);
        let step = residual / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            return Ok(w);
        }
    }

    let residual = (w * w.exp() - x).abs();
    if residual <= 1e-13 * x.max(1.0) {
        Ok(w)
    } else {
        Err(Error::Convergence {
            routine: "lambert_w",
            iterations: MAX_ITERATIONS,
            residual,
        })
    }
}

fn initial_guess(x: f64) -> f64 {
    if x < 3.0 {
        // W(x) ~ x(1 - x) near zero; ln1p keeps the guess on the right side for moderate x
        0.5 * x.ln_1p() + 0.5 * x / (1.0 + x)
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
