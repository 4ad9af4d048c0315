//! Finite-blocklength converse bound of the AWGN channel: closed-form
//! bounds on the missed-detection and false-alarm tails, the λ solve,
//! the rate sandwich and the asymptotic and normal approximations.
//!
//! MD is ncχ²(n, n/Ω) evaluated at nλ (right tail). FA is
//! ncχ²(n, n(1+Ω)/Ω) evaluated at nλ/(1+Ω) (left tail).

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{OnceLock, RwLock};

use crate::dist::{make_noncentral_chi2, DistributionSpec};
use crate::engine::{make_seed, BoundIterate, SeedKind, TailSide};
use crate::error::{param, Error, Result};
use crate::jet::Jet;
use crate::oracle::{ncchi2_ln_cdf, ncchi2_ln_sf};
use crate::specfun::{debye_eta, gaussian_q_inverse, lambert_w0, log_bessel_i_scaled};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnConfig {
    pub n: u64,
    /// Linear SNR.
    pub omega: f64,
    pub eps: f64,
}

impl AwgnConfig {
    pub fn new(n: u64, omega: f64, eps: f64) -> Result<AwgnConfig> {
        if n < 2 {
            return Err(param(format!("blocklength must be at least 2, got {n}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(param(format!("SNR must be finite and positive, got {omega}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(param(format!("error rate must lie in (0, 1), got {eps}")));
        }
        Ok(AwgnConfig { n, omega, eps })
    }

    /// λ₀ = 1 + 1/Ω.
    pub fn lambda0(&self) -> f64 {
        1.0 + 1.0 / self.omega
    }

    /// C = ½ log₂(1 + Ω).
    pub fn capacity(&self) -> f64 {
        0.5 * self.omega.ln_1p() / LN_2
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn md_dist(&self) -> Result<DistributionSpec> {
        make_noncentral_chi2(self.nf(), self.nf() / self.omega)
    }

    pub fn fa_dist(&self) -> Result<DistributionSpec> {
        make_noncentral_chi2(self.nf(), self.nf() * (1.0 + self.omega) / self.omega)
    }

    /// Argument of the FA CDF, nλ/(1+Ω).
    pub fn fa_point(&self, lambda: f64) -> f64 {
        self.nf() * lambda / (1.0 + self.omega)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Which {
    P0,
    P1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnPoint {
    pub config: AwgnConfig,
    /// λ from P₀,MD = ε.
    pub lambda_p0: f64,
    /// λ from P₁,MD = ε.
    pub lambda_p1: f64,
    pub lambda_asym: f64,
    /// Bits per channel use.
    pub r_lower: f64,
    pub r_upper: f64,
    pub r_asym: f64,
    pub r_na: f64,
    pub capacity: f64,
}

fn bessel_parts(cfg: &AwgnConfig, lambda: f64) -> Result<(f64, f64, f64)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfValidity(format!("lambda must be positive, got {lambda}")));
    }
    let n = cfg.nf();
    let u = n * (lambda / cfg.omega).sqrt();
    let pair = log_bessel_i_scaled(0.5 * n, u)?;
    Ok((u, pair.log_scaled_lower + u, pair.ratio))
}

fn below_one(ln_p: f64, what: &str, lambda: f64) -> Result<f64> {
    if ln_p < 0.0 {
        Ok(ln_p)
    } else {
        Err(Error::OutOfValidity(format!("{what} = e^{ln_p} ≥ 1 at lambda = {lambda}")))
    }
}

/// ln P₀,MD(nλ), the g = f upper bound on 1 − F_MD(nλ).
pub fn ln_p0_md(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    below_one(ln_p0_md_raw(cfg, lambda)?, "P0,MD", lambda)
}

/// The printed P₀,MD expression without the below-one check.
pub(crate) fn ln_p0_md_raw(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    let n = cfg.nf();
    let om = cfg.omega;
    let (u, ln_i, r) = bessel_parts(cfg, lambda)?;
    let den = (n - 2.0 - n * lambda) + u * r;
    if !(den < 0.0) {
        return Err(Error::OutOfValidity(format!("P0,MD denominator {den} is not negative at lambda = {lambda}")));
    }
    Ok(-n * (1.0 + lambda * om) / (2.0 * om) + u.ln() + 0.25 * n * (lambda * om).ln() + ln_i - (-den).ln())
}

pub fn p0_md(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    Ok(ln_p0_md(cfg, lambda)?.exp())
}

/// ln P₀,FA(nλ/(1+Ω)), the g = x f upper bound on F_FA.
pub fn ln_p0_fa(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    let n = cfg.nf();
    let om = cfg.omega;
    let (_, ln_i, r) = bessel_parts(cfg, lambda)?;
    let den = om.sqrt() * (1.0 - lambda + om) + lambda.sqrt() * (1.0 + om) * r;
    if !(den > 0.0) {
        return Err(Error::OutOfValidity(format!("P0,FA denominator {den} is not positive at lambda = {lambda}")));
    }
    let ln_p = -n * (2.0 + lambda + 1.0 / om + om) / (2.0 * (1.0 + om))
        + 0.5 * lambda.ln()
        + 0.25 * n * (lambda * om / ((1.0 + om) * (1.0 + om))).ln()
        + om.ln_1p()
        + ln_i
        - den.ln();
    below_one(ln_p, "P0,FA", lambda)
}

pub fn p0_fa(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    Ok(ln_p0_fa(cfg, lambda)?.exp())
}

/// First engine iterate for the MD right tail, −f P₀/P₀′.
pub fn md_p1_iterate(cfg: &AwgnConfig) -> Result<BoundIterate> {
    make_seed(cfg.md_dist()?, SeedKind::PdfSeed, TailSide::Right)?.iterate()
}

/// First engine iterate for the FA left tail, f P₀/P₀′.
pub fn fa_p1_iterate(cfg: &AwgnConfig) -> Result<BoundIterate> {
    make_seed(cfg.fa_dist()?, SeedKind::ShiftedPdfSeed, TailSide::Left)?.iterate()
}

/// ln P₁,MD(nλ), a lower bound on 1 − F_MD(nλ).
pub fn ln_p1_md(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    ln_p1_with(&md_p1_iterate(cfg)?, cfg.nf() * lambda, "P1,MD", lambda)
}

/// ln P₁,FA(nλ/(1+Ω)), a lower bound on F_FA.
pub fn ln_p1_fa(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    ln_p1_with(&fa_p1_iterate(cfg)?, cfg.fa_point(lambda), "P1,FA", lambda)
}

fn ln_p1_with(it: &BoundIterate, x: f64, what: &str, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfValidity(format!("lambda must be positive, got {lambda}")));
    }
    below_one(it.ln_value(x)?, what, lambda)
}

pub fn p1_md(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    Ok(ln_p1_md(cfg, lambda)?.exp())
}

pub fn p1_fa(cfg: &AwgnConfig, lambda: f64) -> Result<f64> {
    Ok(ln_p1_fa(cfg, lambda)?.exp())
}

/// λ₀ + √(2(Ω+2) W(1/(2πε²)) / Ω) / √n.
pub fn lambda_asymptotic(cfg: &AwgnConfig) -> Result<f64> {
    let om = cfg.omega;
    let w = lambert_w0(1.0 / (2.0 * PI * cfg.eps * cfg.eps))?;
    Ok(cfg.lambda0() + (2.0 * (om + 2.0) * w / om).sqrt() / cfg.nf().sqrt())
}

/// Closed-form asymptotic rate at a given λ, in bits.
pub fn rate_asymptotic_at(omega: f64, lambda: f64) -> f64 {
    let s = (1.0 + 4.0 * lambda / omega).sqrt();
    0.5 * omega.ln_1p() / LN_2 - 0.5 * (2.0 * lambda / (1.0 + s)).ln() / LN_2
        + (1.0 + 1.0 / omega + lambda / (1.0 + omega) - s) / (2.0 * LN_2)
}

pub fn rate_asymptotic(cfg: &AwgnConfig) -> Result<f64> {
    Ok(rate_asymptotic_at(cfg.omega, lambda_asymptotic(cfg)?))
}

/// C − √(V/n) Q⁻¹(ε) + log₂(n)/(2n).
pub fn normal_approximation(cfg: &AwgnConfig) -> Result<f64> {
    let om = cfg.omega;
    let log2e = 1.0 / LN_2;
    let v = om * (om + 2.0) / (2.0 * (om + 1.0) * (om + 1.0)) * log2e * log2e;
    let n = cfg.nf();
    Ok(cfg.capacity() - (v / n).sqrt() * gaussian_q_inverse(cfg.eps)? + n.log2() / (2.0 * n))
}

/// Bisection for ln P(λ) = ln ε, with P decreasing in λ.
///
/// Points where P is out of validity count as lying above ε.
fn bisect_lambda<F>(cfg: &AwgnConfig, ln_p: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let target = cfg.eps.ln();
    let g = |lam: f64| -> Result<f64> {
        match ln_p(lam) {
            Ok(v) => Ok(v - target),
            Err(Error::OutOfValidity(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let lam0 = cfg.lambda0();
    let corr = lambda_asymptotic(cfg)? - lam0;
    let mut hi = lam0 + 20.0 * corr;
    let mut ghi = g(hi)?;
    let mut grow = 0;
    while !(ghi < 0.0) {
        grow += 1;
        if grow > 8 {
            return Err(Error::BracketFailed(format!(
                "eps = {} not reached for lambda up to {hi} at n = {} (n below n0?)",
                cfg.eps, cfg.n
            )));
        }
        hi = lam0 + (hi - lam0) * 4.0;
        ghi = g(hi)?;
    }
    // walk down toward λ₀ to the first point above ε; below it a bound
    // may turn back down near its pole
    let mut lo;
    loop {
        lo = lam0 + (hi - lam0) * 0.75;
        if lo - lam0 <= 1e-12 * lam0 {
            return Err(Error::BracketFailed(format!("bound stays below eps = {} down to lambda0", cfg.eps)));
        }
        if g(lo)? > 0.0 {
            break;
        }
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm.abs() <= 1e-10 {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// λ solving P₀,MD(nλ) = ε (P0) or P₁,MD(nλ) = ε (P1).
pub fn solve_lambda(cfg: &AwgnConfig, which: Which) -> Result<f64> {
    match which {
        Which::P0 => bisect_lambda(cfg, |l| ln_p0_md(cfg, l)),
        Which::P1 => {
            let it = md_p1_iterate(cfg)?;
            let n = cfg.nf();
            bisect_lambda(cfg, |l| ln_p1_with(&it, n * l, "P1,MD", l))
        }
    }
}

fn n0_cache() -> &'static RwLock<HashMap<(u64, u64), u64>> {
    static CACHE: OnceLock<RwLock<HashMap<(u64, u64), u64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Smallest n for which every bound of the sandwich is valid and below one.
///
/// Cached per (Ω, ε); concurrent callers may race to fill an entry, and
/// the last write wins.
pub fn n0(omega: f64, eps: f64) -> Result<u64> {
    let key = (omega.to_bits(), eps.to_bits());
    if let Some(&v) = n0_cache().read().expect("n0 cache poisoned").get(&key) {
        return Ok(v);
    }
    let mut found = None;
    for n in 2..=100_000u64 {
        match converse_bounds(&AwgnConfig::new(n, omega, eps)?) {
            Ok(_) => {
                found = Some(n);
                break;
            }
            Err(Error::OutOfValidity(_) | Error::BracketFailed(_) | Error::PoleEncountered(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let n = found.ok_or_else(|| Error::BracketFailed(format!("no n0 found for omega = {omega}, eps = {eps}")))?;
    n0_cache().write().expect("n0 cache poisoned").insert(key, n);
    Ok(n)
}

/// λ from P₀,MD and P₁,MD, the rate sandwich and both approximations.
pub fn converse_bounds(cfg: &AwgnConfig) -> Result<AwgnPoint> {
    let nl = cfg.nf() * LN_2;
    let lambda_p0 = solve_lambda(cfg, Which::P0)?;
    let lambda_p1 = solve_lambda(cfg, Which::P1)?;
    let r_lower = -ln_p0_fa(cfg, lambda_p0)? / nl;
    let r_upper = -ln_p1_fa(cfg, lambda_p1)? / nl;
    Ok(AwgnPoint {
        config: *cfg,
        lambda_p0,
        lambda_p1,
        lambda_asym: lambda_asymptotic(cfg)?,
        r_lower,
        r_upper,
        r_asym: rate_asymptotic(cfg)?,
        r_na: normal_approximation(cfg)?,
        capacity: cfg.capacity(),
    })
}

/// λ solving 1 − F_MD(nλ) = ε with the series oracle.
pub fn oracle_lambda(cfg: &AwgnConfig) -> Result<f64> {
    let n = cfg.nf();
    let s = n / cfg.omega;
    bisect_lambda(cfg, |l| ncchi2_ln_sf(n, s, n * l, 1e-15))
}

/// Exact converse −(1/n) log₂ F_FA(nλ/(1+Ω)) from the series oracle.
pub fn oracle_converse(cfg: &AwgnConfig) -> Result<f64> {
    let n = cfg.nf();
    let lambda = oracle_lambda(cfg)?;
    let s = n * (1.0 + cfg.omega) / cfg.omega;
    Ok(-ncchi2_ln_cdf(n, s, cfg.fa_point(lambda), 1e-15)? / (n * LN_2))
}

/// Quantities of the large-n analysis at one (Ω, λ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DebyeInternals {
    pub omega: f64,
    pub lambda: f64,
    /// z = 2√(λ/Ω)
    pub z: f64,
    pub eta: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub phi2: f64,
    /// J(λ) = (1 − λ) + √(λ/Ω) z/(1 + √(1+z²))
    pub j: f64,
    pub jprime: f64,
    pub phi2_at_lambda0: f64,
    pub jprime_at_lambda0: f64,
}

impl DebyeInternals {
    /// (1/√π) √((Ω+2)/Ω) e^{−Ωu²/(4(Ω+2))} / u
    pub fn eps_balance(&self, u: f64) -> f64 {
        let om = self.omega;
        ((om + 2.0) / om).sqrt() / PI.sqrt() * (-om * u * u / (4.0 * (om + 2.0))).exp() / u
    }
}

fn phi_jet(omega: f64, lam: &Jet) -> Result<Jet> {
    let z = lam.scale(4.0 / omega).sqrt()?;
    let s = (&z * &z).add_scalar(1.0).sqrt()?;
    let eta = &s + &z.div(&s.add_scalar(1.0))?.ln()?;
    let lin = lam.scale(-0.5).add_scalar(-0.5 / omega);
    Ok(lin + lam.scale(omega).ln()?.scale(0.25) + eta.scale(0.5))
}

fn j_jet(omega: f64, lam: &Jet) -> Result<Jet> {
    let z = lam.scale(4.0 / omega).sqrt()?;
    let s = (&z * &z).add_scalar(1.0).sqrt()?;
    let r = z.div(&s.add_scalar(1.0))?;
    Ok(lam.scale(-1.0).add_scalar(1.0) + &lam.scale(1.0 / omega).sqrt()? * &r)
}

/// Φ, J and their derivatives by jet arithmetic, at λ and at λ₀.
pub fn debye_internals(omega: f64, lambda: f64) -> Result<DebyeInternals> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(param(format!("SNR must be finite and positive, got {omega}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(param(format!("lambda must be finite and positive, got {lambda}")));
    }
    let lam = Jet::variable(lambda, 2);
    let phi = phi_jet(omega, &lam)?;
    let j = j_jet(omega, &lam)?;
    let lam0 = Jet::variable(1.0 + 1.0 / omega, 2);
    let phi0 = phi_jet(omega, &lam0)?;
    let j0 = j_jet(omega, &lam0)?;
    let z = 2.0 * (lambda / omega).sqrt();
    Ok(DebyeInternals {
        omega,
        lambda,
        z,
        eta: debye_eta(z),
        phi: phi.value(),
        phi_prime: phi.coeff(1),
        phi2: phi.derivative(2),
        j: j.value(),
        jprime: j.coeff(1),
        phi2_at_lambda0: phi0.derivative(2),
        jprime_at_lambda0: j0.coeff(1),
    })
}

/// Independent evaluations for many configurations.
pub fn converse_bounds_many(cfgs: &[AwgnConfig]) -> Vec<Result<AwgnPoint>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cfgs.iter().map(|c| s.spawn(move || converse_bounds(c))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_engine_seeds() {
        for (n, om, lam) in [(200, 1.0, 2.3), (1000, 5.0, 1.35), (100_000, 1.0, 2.02)] {
            let cfg = AwgnConfig::new(n, om, 1e-3).unwrap();
            let md = make_seed(cfg.md_dist().unwrap(), SeedKind::PdfSeed, TailSide::Right).unwrap();
            let e = md.ln_value(cfg.nf() * lam).unwrap();
            let c = ln_p0_md(&cfg, lam).unwrap();
            assert!((e - c).abs() < 1e-9 * c.abs().max(1.0), "md n={n}: {e} vs {c}");
            let fa = make_seed(cfg.fa_dist().unwrap(), SeedKind::ShiftedPdfSeed, TailSide::Left).unwrap();
            let e = fa.ln_value(cfg.fa_point(lam)).unwrap();
            let c = ln_p0_fa(&cfg, lam).unwrap();
            assert!((e - c).abs() < 1e-9 * c.abs().max(1.0), "fa n={n}: {e} vs {c}");
        }
    }

    #[test]
    fn approximations() {
        let cfg = AwgnConfig::new(1000, 1.0, 1e-3).unwrap();
        assert_eq!(cfg.capacity(), 0.5);
        let na = normal_approximation(&cfg).unwrap();
        assert!((na - 0.4186).abs() < 1e-4, "{na}");
        assert!((rate_asymptotic_at(1.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((rate_asymptotic_at(5.0, 1.2) - cfg_capacity(5.0)).abs() < 1e-15);
        let big = AwgnConfig::new(100_000_000, 1.0, 1e-3).unwrap();
        assert!((lambda_asymptotic(&big).unwrap() - 2.0).abs() < 1e-3);
    }

    fn cfg_capacity(om: f64) -> f64 {
        0.5 * (1.0 + om).log2()
    }

    #[test]
    fn debye_identities() {
        for om in [0.5, 1.0, 2.0, 5.0] {
            let d = debye_internals(om, 1.0 + 1.0 / om).unwrap();
            assert!(d.phi.abs() < 1e-12, "{}", d.phi);
            assert!(d.phi_prime.abs() < 1e-12);
            assert!(d.j.abs() < 1e-12);
            assert!((d.phi2_at_lambda0 + om / (2.0 * (om + 2.0))).abs() < 1e-10);
            assert!((d.jprime_at_lambda0 + (om + 1.0) / (om + 2.0)).abs() < 1e-10);
        }
        // λ_asym solves the balance equation
        let cfg = AwgnConfig::new(10_000, 1.0, 1e-3).unwrap();
        let d = debye_internals(1.0, 2.0).unwrap();
        let u = (cfg.nf()).sqrt() * (lambda_asymptotic(&cfg).unwrap() - 2.0);
        assert!((d.eps_balance(u) / 1e-3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_blocklengths() {
        assert_eq!(n0(1.0, 1e-3).unwrap(), 10);
        assert_eq!(n0(5.0, 1e-5).unwrap(), 3);
        let cfg = AwgnConfig::new(4, 1.0, 1e-3).unwrap();
        assert!(matches!(converse_bounds(&cfg), Err(Error::OutOfValidity(_))));
    }

    #[test]
    fn sandwich_at_200() {
        let cfg = AwgnConfig::new(200, 1.0, 1e-3).unwrap();
        let lam = 2.3;
        let p0 = ln_p0_md(&cfg, lam).unwrap();
        let p1 = ln_p1_md(&cfg, lam).unwrap();
        let tail = ncchi2_ln_sf(200.0, 200.0, 200.0 * lam, 1e-15).unwrap();
        assert!(p1 <= tail && tail <= p0, "{p1} {tail} {p0}");
        let p0 = ln_p0_fa(&cfg, lam).unwrap();
        let p1 = ln_p1_fa(&cfg, lam).unwrap();
        let tail = ncchi2_ln_cdf(200.0, 400.0, cfg.fa_point(lam), 1e-15).unwrap();
        assert!(p1 <= tail && tail <= p0, "{p1} {tail} {p0}");
    }

    #[test]
    fn p0_md_decreasing() {
        let cfg = AwgnConfig::new(200, 1.0, 1e-3).unwrap();
        // the first few points lie above one, so the raw expression is swept
        let v: Vec<f64> = (0..61).map(|i| ln_p0_md_raw(&cfg, 2.05 + 1.95 * i as f64 / 60.0).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn solver_contract() {
        let cfg = AwgnConfig::new(1000, 1.0, 1e-3).unwrap();
        let l0 = solve_lambda(&cfg, Which::P0).unwrap();
        let l1 = solve_lambda(&cfg, Which::P1).unwrap();
        assert!(l0 > cfg.lambda0() && l1 <= l0);
        assert!((p0_md(&cfg, l0).unwrap() / 1e-3 - 1.0).abs() <= 1e-10);
        assert!((p1_md(&cfg, l1).unwrap() / 1e-3 - 1.0).abs() <= 1e-10);
    }
}
