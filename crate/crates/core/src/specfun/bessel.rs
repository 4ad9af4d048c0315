use std::sync::OnceLock;

use super::gamma::ln_gamma;
use super::LN_2PI;
use crate::error::{domain, Result};
use crate::jet::{solve_ode, Jet};

/// Number of Debye polynomials u_k kept.
const DEBYE_TERMS: usize = 16;

/// Exponentially scaled Bessel pair at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBesselPair {
    /// ln(e^{−u} I_{ν−1}(u))
    pub log_scaled_lower: f64,
    /// I_ν(u) / I_{ν−1}(u)
    pub ratio: f64,
    pub nu: f64,
    pub u: f64,
}

impl ScaledBesselPair {
    /// ln(e^{−u} I_ν(u))
    pub fn log_scaled_upper(&self) -> f64 {
        self.log_scaled_lower + self.ratio.ln()
    }
}

/// η(z) = √(1+z²) + ln(z / (1 + √(1+z²))).
pub fn debye_eta(z: f64) -> f64 {
    let s = (1.0 + z * z).sqrt();
    s + (z / (1.0 + s)).ln()
}

/// Coefficients of u_k(p) in powers of p, k = 0..DEBYE_TERMS.
fn debye_polys() -> &'static Vec<Vec<f64>> {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys = vec![vec![1.0]];
        for k in 0..DEBYE_TERMS - 1 {
            let prev = &polys[k];
            let mut next = vec![0.0; prev.len() + 3];
            for (d, &c) in prev.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let df = d as f64;
                // ½ p²(1 − p²) u_k′
                if d > 0 {
                    next[d + 1] += 0.5 * df * c;
                    next[d + 3] -= 0.5 * df * c;
                }
                // ⅛ ∫₀ᵖ (1 − 5t²) u_k(t) dt
                next[d + 1] += c / (8.0 * (df + 1.0));
                next[d + 3] -= 5.0 * c / (8.0 * (df + 3.0));
            }
            polys.push(next);
        }
        polys
    })
}

/// Σ_k u_k(p)/μ^k written as Σ_k w^{−k} Σ_d c_{k,d} p^{d−k}, valid at μ = 0.
fn debye_sum(p: f64, w: f64) -> f64 {
    let polys = debye_polys();
    let mut sum = 0.0;
    let mut wk = 1.0;
    let mut prev = f64::INFINITY;
    for (k, poly) in polys.iter().enumerate() {
        let mut acc = 0.0;
        for d in (k..poly.len()).rev() {
            acc = acc * p + poly[d];
        }
        let term = acc * wk;
        if term.abs() > prev {
            break;
        }
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
        wk /= w;
    }
    sum
}

/// ln(e^{−u} I_μ(u)) from the uniform large-order expansion.
pub(crate) fn log_i_debye(mu: f64, u: f64) -> f64 {
    let w = (mu * mu + u * u).sqrt();
    let p = mu / w;
    mu * mu / (w + u) + mu * (u / (mu + w)).ln() - 0.5 * (LN_2PI + w.ln()) + debye_sum(p, w).ln()
}

/// ln(I_{μ+1}(u)/I_μ(u)) from the uniform expansion, differenced analytically.
fn log_ratio_debye(mu: f64, u: f64) -> f64 {
    let w0 = (mu * mu + u * u).sqrt();
    let m1 = mu + 1.0;
    let w1 = (m1 * m1 + u * u).sqrt();
    let dw = (2.0 * mu + 1.0) / (w0 + w1);
    let s0 = debye_sum(mu / w0, w0);
    let s1 = debye_sum(m1 / w1, w1);
    dw + (u / (m1 + w1)).ln() - mu * ((1.0 + dw) / (mu + w0)).ln_1p() - 0.5 * (dw / w0).ln_1p() + (s1 / s0).ln()
}

/// ln(e^{−u} I_μ(u)) from the ascending power series, summed with rescaling.
pub(crate) fn log_i_series(mu: f64, u: f64) -> f64 {
    const RESCALE: f64 = 1e280;
    let q = 0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut offset = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + mu));
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            offset += RESCALE.ln();
        }
        if term <= 1e-17 * sum && k > q.sqrt() - mu {
            break;
        }
    }
    mu * (0.5 * u).ln() - ln_gamma(mu + 1.0) + sum.ln() + offset - u
}

fn use_series(nu: f64, u: f64) -> bool {
    u < (0.5 * nu).max(30.0)
}

/// Scaled log of I_{ν−1}(u) and the ratio I_ν(u)/I_{ν−1}(u).
pub fn log_bessel_i_scaled(nu: f64, u: f64) -> Result<ScaledBesselPair> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(domain(format!("scaled Bessel needs finite u > 0, got {u}")));
    }
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(domain(format!("scaled Bessel needs nu ≥ 1, got {nu}")));
    }
    let mu = nu - 1.0;
    let (lower, ratio) = if use_series(nu, u) {
        let lo = log_i_series(mu, u);
        (lo, (log_i_series(nu, u) - lo).exp())
    } else {
        (log_i_debye(mu, u), log_ratio_debye(mu, u).exp())
    };
    Ok(ScaledBesselPair { log_scaled_lower: lower, ratio, nu, u })
}

/// Jets of ln(e^{−U}I_{ν−1}(U)) and of I_ν(U)/I_{ν−1}(U) along the anchor variable.
#[derive(Clone, Debug)]
pub struct BesselJets {
    pub log_scaled_lower: Jet,
    pub ratio: Jet,
    pub nu: f64,
}

impl BesselJets {
    /// Jet of e^{−U} I_{ν−1}(U).
    pub fn scaled_lower(&self) -> Jet {
        self.log_scaled_lower.exp()
    }

    /// Jet of e^{−U} I_ν(U).
    pub fn scaled_upper(&self) -> Jet {
        &self.log_scaled_lower.exp() * &self.ratio
    }

    pub fn scaled_values(&self) -> ScaledBesselPair {
        ScaledBesselPair {
            log_scaled_lower: self.log_scaled_lower.value(),
            ratio: self.ratio.value(),
            nu: self.nu,
            u: f64::NAN,
        }
    }
}

/// Propagates the scaled Bessel pair through a jet argument U(x).
///
/// With μ = ν − 1 and R = I_ν/I_μ, the system integrated is
/// Y′ = (R + μ/U − 1) U′ and R′ = (1 − R² − (2μ+1) R/U) U′.
pub fn bessel_i_jet(nu: f64, u: &Jet) -> Result<BesselJets> {
    let pair = log_bessel_i_scaled(nu, u.value())?;
    let mu = nu - 1.0;
    let order = u.order();
    let du = if order > 0 { Some(u.shift_derivative()?) } else { None };
    let states = solve_ode(u.anchor(), order, &[pair.log_scaled_lower, pair.ratio], |s| {
        let k = s[0].order();
        let uk = u.truncate(k);
        let dk = du.as_ref().expect("order > 0 inside the solver").truncate(k);
        let inv = uk.recip()?;
        let r = &s[1];
        let dy = &(r + &inv.scale(mu)).add_scalar(-1.0) * &dk;
        let dr = &(&(-(r * r)).add_scalar(1.0) - &(r * &inv).scale(2.0 * mu + 1.0)) * &dk;
        Ok(vec![dy, dr])
    })?;
    let mut it = states.into_iter();
    Ok(BesselJets { log_scaled_lower: it.next().unwrap(), ratio: it.next().unwrap(), nu })
}
