//! Reference tail probabilities: adaptive Gauss–Kronrod quadrature of any
//! density and closed references for the catalog distributions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dist::{DistributionSpec, Family};
use crate::engine::TailSide;
use crate::error::{domain, Error, Result};
use crate::specfun::{
    ln_add_exp, ln_gamma, ln_gaussian_q, ln_one_minus_exp, ln_reg_inc_beta, ln_reg_inc_gamma_p,
    ln_reg_inc_gamma_q,
};

pub const DEFAULT_MAX_SUBDIVISIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Adaptive G7–K15 integration of `f` over the finite interval [a, b].
///
/// Stops when the summed error estimate is below `tol · |value|`
/// (with an absolute floor of 1e−300).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_subdivisions: usize) -> Result<QuadratureResult> {
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, err: e });
    let (mut total, mut err) = (v, e);
    let mut subdivisions = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::ToleranceNotMet(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= (tol * total.abs()).max(1e-300) {
            return Ok(QuadratureResult { value: total, abs_error_estimate: err, subdivisions });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::ToleranceNotMet(format!(
                "quadrature error {err:e} above target after {subdivisions} subdivisions"
            )));
        }
        let p = heap.pop().expect("heap holds at least one piece");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, err: e2 });
        subdivisions += 1;
        if heap.len() > 2 * max_subdivisions {
            // keep the running error honest against drift
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

/// Tail mass by quadrature: ∫ f over (x, r) or (l, x).
pub fn tail_by_quadrature(dist: &DistributionSpec, x: f64, side: TailSide, tol: f64) -> Result<QuadratureResult> {
    let s = dist.support;
    if !(x >= s.lower && x <= s.upper) {
        return Err(domain(format!("x = {x} outside the support of {}", dist.name)));
    }
    let tol = tol.max(1e-13);
    let pdf = |y: f64| dist.pdf(y);
    let mapped = |c: f64, dir: f64| {
        move |u: f64| {
            let y = c + dir * (1.0 - u) / u;
            let v = pdf(y);
            if v == 0.0 {
                0.0
            } else {
                v / (u * u)
            }
        }
    };
    match side {
        TailSide::Right if s.upper.is_infinite() => integrate(mapped(x, 1.0), 0.0, 1.0, tol, DEFAULT_MAX_SUBDIVISIONS),
        TailSide::Right => integrate(pdf, x, s.upper, tol, DEFAULT_MAX_SUBDIVISIONS),
        TailSide::Left if s.lower.is_infinite() => integrate(mapped(x, -1.0), 0.0, 1.0, tol, DEFAULT_MAX_SUBDIVISIONS),
        TailSide::Left => integrate(pdf, s.lower, x, tol, DEFAULT_MAX_SUBDIVISIONS),
    }
}

fn poisson_ln_weight(half: f64, j: f64) -> f64 {
    if half == 0.0 {
        return if j == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -half + j * half.ln() - ln_gamma(j + 1.0)
}

/// ln of Σ_j w_j T(k/2 + j, x/2), with Poisson weights w_j of mean s/2.
///
/// The sum runs outward from the Poisson mode; each direction stops once
/// the remaining terms are bounded below `tol` relative to the sum.
fn ncchi2_series_ln<T>(k: f64, s: f64, x: f64, tol: f64, term_decreasing: bool, term: T) -> Result<f64>
where
    T: Fn(f64, f64) -> Result<f64>,
{
    let half = 0.5 * s;
    let y = 0.5 * x;
    let cut = tol.max(1e-300).ln() - 5.0;
    let jmax = (half + 40.0 * (half + 1.0).sqrt() + 50.0).ceil();
    let mode = half.floor();
    let mut sum = f64::NEG_INFINITY;
    let mut j = mode;
    let (mut t_prev, mut step_prev) = (f64::NAN, f64::NAN);
    loop {
        let lw = poisson_ln_weight(half, j);
        let t = lw + term(0.5 * k + j, y)?;
        sum = ln_add_exp(sum, t);
        // past the mode the weights shrink by at least half/(j+1) per step
        let ratio = half / (j + 1.0);
        let lead = if term_decreasing { t } else { lw };
        let mut rest = if ratio < 1.0 { lead - (1.0 - ratio).ln() } else { f64::INFINITY };
        // shrinking term ratios give a geometric bound on the rest
        let step = t - t_prev;
        if step < 0.0 && step < step_prev {
            rest = rest.min(t + step - (-step.exp_m1()).ln());
        }
        (t_prev, step_prev) = (t, step);
        if rest < sum + cut {
            break;
        }
        if j >= jmax {
            return Err(Error::ToleranceNotMet(format!("Poisson series not converged by j = {jmax}")));
        }
        j += 1.0;
    }
    // downward, j = mode−1, ..., 0; terms are at most w_j
    let mut j = mode - 1.0;
    while j >= 0.0 {
        let lw = poisson_ln_weight(half, j);
        if lw < sum + cut {
            break;
        }
        sum = ln_add_exp(sum, lw + term(0.5 * k + j, y)?);
        j -= 1.0;
    }
    Ok(sum)
}

fn check_ncchi2(k: f64, s: f64, x: f64) -> Result<()> {
    if !(k > 0.0 && s >= 0.0 && x >= 0.0) {
        return Err(domain(format!("ncchi2 series needs k > 0, s ≥ 0, x ≥ 0 (k = {k}, s = {s}, x = {x})")));
    }
    Ok(())
}

/// ln F(x) for the non-central chi-squared (k, s).
pub fn ncchi2_ln_cdf(k: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    check_ncchi2(k, s, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    ncchi2_series_ln(k, s, x, tol, true, ln_reg_inc_gamma_p)
}

/// ln(1 − F(x)) for the non-central chi-squared (k, s).
pub fn ncchi2_ln_sf(k: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    check_ncchi2(k, s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    ncchi2_series_ln(k, s, x, tol, false, ln_reg_inc_gamma_q)
}

/// F(x) = 1 − Q_{k/2}(√s, √x) from the Poisson-weighted gamma series.
pub fn ncchi2_cdf_series(k: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    Ok(ncchi2_ln_cdf(k, s, x, tol)?.exp())
}

/// ln of the reference tail: closed forms for the catalog, quadrature otherwise.
pub fn oracle_ln_tail(dist: &DistributionSpec, x: f64, side: TailSide) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("oracle tail at x = NaN".into()));
    }
    let right = side == TailSide::Right;
    match dist.family {
        Family::Gaussian { mu, sigma } => {
            let z = (x - mu) / sigma;
            Ok(ln_gaussian_q(if right { z } else { -z }))
        }
        Family::BetaPrime { alpha, beta } => {
            if !(x > 0.0) {
                return Ok(if right { 0.0 } else { f64::NEG_INFINITY });
            }
            if right {
                ln_reg_inc_beta(1.0 / (1.0 + x), beta, alpha)
            } else {
                ln_reg_inc_beta(x / (1.0 + x), alpha, beta)
            }
        }
        Family::NoncentralChi2 { k, s } => {
            let x = x.max(0.0);
            if right {
                ncchi2_ln_sf(k, s, x, 1e-15)
            } else {
                ncchi2_ln_cdf(k, s, x, 1e-15)
            }
        }
        Family::Exponential { rate } => {
            let x = x.max(0.0);
            Ok(if right { -rate * x } else { ln_one_minus_exp(-rate * x) })
        }
        Family::Custom => Ok(tail_by_quadrature(dist, x, side, 1e-12)?.value.ln()),
    }
}

pub fn oracle_tail(dist: &DistributionSpec, x: f64, side: TailSide) -> Result<f64> {
    Ok(oracle_ln_tail(dist, x, side)?.exp())
}
