use std::f64::consts::E;

use crate::error::{domain, Result};

/// Principal branch W₀ of the Lambert W function.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch {
        return Err(domain(format!("Lambert W0 needs x ≥ −1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x > E {
        let l = x.ln();
        l - l.ln()
    } else if x > 0.25 {
        (1.0 + x).ln() * 0.75
    } else if x > branch + 0.05 {
        // series near 0
        x * (1.0 - x * (1.0 - 1.5 * x))
    } else {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p * (1.0 - p * (1.0 / 3.0 - p * 11.0 / 72.0))
    };
    if x - branch < 1e-300 {
        return Ok(-1.0);
    }
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
