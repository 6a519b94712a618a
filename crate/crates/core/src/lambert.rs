//! The lower real branch W_{-1} of the Lambert W function.

use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// W_{-1}(s) for s in [-1/e, 0): the solution w <= -1 of w e^w = s.
pub fn lambert_w_m1(s: f64) -> Result<f64> {
    if !(s < 0.0) || s < -INV_E - 1e-15 {
        return Err(Error::params(format!("W_-1 is real only on [-1/e, 0), got {s}")));
    }
    let s = s.max(-INV_E);
    if s == -INV_E {
        return Ok(-1.0);
    }
    let mut w = if s < -0.25 {
        // series around the branch point
        let p = -(2.0 * (1.0 + std::f64::consts::E * s)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-s).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - s;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-16 * w.abs().max(1.0) {
            break;
        }
    }
    Ok(w)
}
