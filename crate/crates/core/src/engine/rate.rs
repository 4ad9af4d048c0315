use super::BoundIterate;
use crate::error::{Error, Result};

fn spread(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::PoleEncountered(x));
    }
    Ok(if a >= 1.0 { a - 1.0 } else { (1.0 - a) / a })
}

/// R_i(x) = P_U/P_L − 1 for the pair (P_i, P_{i+1}), from the derivative form.
///
/// P_{i+1}/P_i = 1/a with a = ∓P_i′/f, so the next iterate is never formed.
pub fn convergence_rate(it: &BoundIterate, x: f64) -> Result<f64> {
    let c = it.chain(x, 1)?;
    let a = it.side.sign() * c.slope(it.index);
    spread(a, x)
}

/// Same quantity from the ratio of consecutive iterates.
pub fn convergence_rate_ratio(it: &BoundIterate, x: f64) -> Result<f64> {
    let next = it.iterate()?;
    let c = next.chain(x, 0)?;
    let b = c.q[it.index + 1].value() / c.q[it.index].value();
    spread(1.0 / b, x)
}

/// P_U(x)/P_L(x) − 1 for an arbitrary pair of iterates.
pub fn convergence_rate_pair(upper: &BoundIterate, lower: &BoundIterate, x: f64) -> Result<f64> {
    Ok((upper.ln_value(x)? - lower.ln_value(x)?).exp_m1())
}
