//! Invariant suites behind `tailkit verify`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::awgn::{converse_bounds, debye_internals, oracle_converse, AwgnConfig};
use crate::connections::{chernoff_h, classify_h, markov_h, MgfFn};
use crate::dist::{make_beta_prime, make_exponential, make_gaussian, make_noncentral_chi2, DistributionSpec};
use crate::engine::{
    classify, convergence_rate, grid_points, make_seed, BoundIterate, Classification, GridSpec, SeedKind,
    TailSide, Verdict, DEFAULT_TOL,
};
use crate::error::{param, Error, Result};
use crate::jet::Jet;
use crate::oracle::oracle_ln_tail;
use crate::report::{awgn_table, bounds_table, AwgnRequest, BoundsRequest};
use crate::specfun::{self, lambert_w0, log_bessel_i_scaled};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Jet,
    Specfun,
    Bounds,
    Awgn,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "jet" => Ok(Suite::Jet),
            "specfun" => Ok(Suite::Specfun),
            "bounds" => Ok(Suite::Bounds),
            "awgn" => Ok(Suite::Awgn),
            "all" => Ok(Suite::All),
            other => Err(param(format!("unknown suite {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Tolerances used by the suites. Each can be overridden by name.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyTolerances {
    pub jet: f64,
    pub lambert: f64,
    pub bessel_recurrence: f64,
    pub debye_crossover: f64,
    pub sandwich: f64,
    pub threshold: f64,
    pub identity: f64,
    pub fd: f64,
    pub classify: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            jet: 1e-10,
            lambert: 1e-12,
            bessel_recurrence: 1e-9,
            debye_crossover: 1e-8,
            sandwich: 1e-9,
            threshold: 1e-6,
            identity: 1e-10,
            fd: 1e-9,
            classify: DEFAULT_TOL,
        }
    }
}

impl VerifyTolerances {
    pub const NAMES: [&'static str; 9] =
        ["jet", "lambert", "bessel_recurrence", "debye_crossover", "sandwich", "threshold", "identity", "fd", "classify"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(param(format!("tolerance {name} must be positive, got {value}")));
        }
        let slot = match name {
            "jet" => &mut self.jet,
            "lambert" => &mut self.lambert,
            "bessel_recurrence" => &mut self.bessel_recurrence,
            "debye_crossover" => &mut self.debye_crossover,
            "sandwich" => &mut self.sandwich,
            "threshold" => &mut self.threshold,
            "identity" => &mut self.identity,
            "fd" => &mut self.fd,
            "classify" => &mut self.classify,
            other => return Err(param(format!("unknown tolerance {other}, expected one of {:?}", Self::NAMES))),
        };
        *slot = value;
        Ok(())
    }

    /// Applies a `name=value` override.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec.split_once('=').ok_or_else(|| param(format!("tolerance override {spec} is not name=value")))?;
        let value: f64 = value.trim().parse().map_err(|_| param(format!("tolerance {name} has a bad value {value}")))?;
        self.set(name.trim(), value)
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), passed, detail: detail.into() }
}

fn from_result(name: &str, r: Result<CheckResult>) -> CheckResult {
    r.unwrap_or_else(|e| check(name, false, format!("error: {e}")))
}

pub fn run_suite(suite: Suite, tols: &VerifyTolerances) -> Vec<CheckResult> {
    match suite {
        Suite::Jet => jet_suite(tols),
        Suite::Specfun => specfun_suite(tols),
        Suite::Bounds => bounds_suite(tols),
        Suite::Awgn => awgn_suite(tols),
        Suite::All => {
            let mut out = jet_suite(tols);
            out.extend(specfun_suite(tols));
            out.extend(bounds_suite(tols));
            out.extend(awgn_suite(tols));
            out.extend(csv_suite());
            out
        }
    }
}

// ---------------------------------------------------------------- jet

fn test_function(x: &Jet) -> Result<Jet> {
    // e^{x/3} √(1+x²) / (2+x)
    let a = x.scale(1.0 / 3.0).exp();
    let b = (x * x).add_scalar(1.0).sqrt()?;
    (&a * &b).div(&x.add_scalar(2.0))
}

fn jet_suite(tols: &VerifyTolerances) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let anchors = [-0.7, 0.3, 1.0, 2.5, 6.0];

    let mut worst = 0.0f64;
    for &x in &anchors {
        let v = Jet::variable(x, 6);
        let a = v.scale(0.5).exp();
        let b = (&v * &v).add_scalar(3.0).ln().unwrap();
        let p = &a * &b;
        // Leibniz: (ab)^{(k)} = Σ C(k,j) a^{(j)} b^{(k−j)}
        for k in 0..=6 {
            let mut s = 0.0;
            let mut c = 1.0;
            for j in 0..=k {
                s += c * a.derivative(j) * b.derivative(k - j);
                c = c * (k - j) as f64 / (j + 1) as f64;
            }
            let d = p.derivative(k);
            worst = worst.max((d - s).abs() / (1.0 + s.abs()));
        }
    }
    out.push(check("jet product rule", worst <= tols.jet, format!("max relative error {worst:.2e} over 5 anchors, orders 0..6")));

    let mut worst = 0.0f64;
    for &x in &anchors {
        let j = match test_function(&Jet::variable(x, 2)) {
            Ok(j) => j,
            Err(e) => {
                out.push(check("jet finite difference", false, format!("error: {e}")));
                return out;
            }
        };
        let f = |t: f64| test_function(&Jet::constant(t, t, 0)).map(|j| j.value()).unwrap_or(f64::NAN);
        let h = 1e-4 * (1.0 + x.abs());
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        worst = worst.max((j.derivative(1) - d1).abs() / (1.0 + d1.abs()));
        worst = worst.max(1e-3 * (j.derivative(2) - d2).abs() / (1.0 + d2.abs()));
    }
    // central differences carry O(h²) truncation error
    let fd_tol = tols.jet * 1e3;
    out.push(check("jet finite difference", worst <= fd_tol, format!("max scaled error {worst:.2e}, bound {fd_tol:.1e}")));

    let mut worst = 0.0f64;
    for &x in &anchors {
        let v = Jet::variable(x, 8);
        let a = v.scale(0.2).exp();
        let b = (&v * &v).add_scalar(1.5);
        match a.div(&b) {
            Ok(q) => {
                let back = &q * &b;
                for k in 0..=8 {
                    worst = worst.max((back.coeff(k) - a.coeff(k)).abs() / (1.0 + a.coeff(k).abs()));
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(check("jet division round trip", worst <= tols.jet, format!("max relative error {worst:.2e}")));
    out
}

// ---------------------------------------------------------------- specfun

fn specfun_suite(tols: &VerifyTolerances) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let mut failed = None;
    for i in 0..=200 {
        let x = -1.0 / std::f64::consts::E + 1e-6 + (i as f64 / 200.0).powi(4) * 1e6;
        match lambert_w0(x) {
            Ok(w) => worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0)),
            Err(e) => failed = Some(e),
        }
    }
    out.push(match failed {
        Some(e) => check("lambert W residual", false, format!("error: {e}")),
        None => check("lambert W residual", worst <= tols.lambert, format!("max |w e^w − x| / max(1,|x|) = {worst:.2e}")),
    });

    let cases = [(1.5, 0.3), (5.0, 10.0), (20.0, 35.0), (50.0, 120.0), (500.0, 900.0), (2000.0, 1500.0), (5e5, 1.1e6)];
    let r = (|| {
        let mut worst = 0.0f64;
        for (nu, u) in cases {
            let r0 = log_bessel_i_scaled(nu, u)?.ratio;
            let r1 = log_bessel_i_scaled(nu + 1.0, u)?.ratio;
            worst = worst.max((1.0 - r0 * r1 - 2.0 * nu / u * r0).abs());
        }
        Ok(check("bessel recurrence", worst <= tols.bessel_recurrence, format!("max residual {worst:.2e} over {} (ν, u)", cases.len())))
    })();
    out.push(from_result("bessel recurrence", r));

    let mut worst = 0.0f64;
    for nu in [1.0, 1.5, 3.0, 10.0, 40.0, 60.0, 100.0, 250.0, 1000.0, 1e4] {
        let u = (0.5f64 * nu).max(30.0);
        for mu in [nu - 1.0, nu] {
            let a = specfun::bessel::log_i_series(mu, u);
            let b = specfun::bessel::log_i_debye(mu, u);
            worst = worst.max(((a - b).exp() - 1.0).abs());
        }
    }
    out.push(check("debye crossover", worst <= tols.debye_crossover, format!("max relative jump {worst:.2e}")));

    let mut worst = 0.0f64;
    for eps in [1e-1, 1e-3, 1e-5, 1e-9, 1e-15] {
        match specfun::gaussian_q_inverse(eps) {
            Ok(q) => worst = worst.max((specfun::gaussian_q(q) / eps - 1.0).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(check("gaussian Q inverse round trip", worst <= 1e-12, format!("max relative error {worst:.2e}")));

    let r = (|| {
        let mut worst = 0.0f64;
        for (x, a, b) in [(0.3, 2.1, 1.3), (0.9, 0.5, 7.0), (0.01, 30.0, 2.0)] {
            let lhs = specfun::reg_inc_beta(x, a, b)?;
            let rhs = specfun::reg_inc_beta_upper(1.0 - x, b, a)?;
            worst = worst.max((lhs - rhs).abs());
            let sum = specfun::reg_inc_beta(x, a, b)? + specfun::reg_inc_beta_upper(x, a, b)?;
            worst = worst.max((sum - 1.0).abs());
        }
        Ok(check("incomplete beta symmetry", worst <= 1e-13, format!("max error {worst:.2e}")))
    })();
    out.push(from_result("incomplete beta symmetry", r));
    out
}

// ---------------------------------------------------------------- bounds

struct Catalog {
    name: &'static str,
    dist: Arc<DistributionSpec>,
    side: TailSide,
    seed: SeedKind,
    window: (f64, f64),
    /// Sub-window where every iterate is in its verified region.
    far: (f64, f64),
}

fn catalog() -> Result<Vec<Catalog>> {
    Ok(vec![
        Catalog {
            name: "gaussian(-1.7, 1.9)",
            dist: Arc::new(make_gaussian(-1.7, 1.9)?),
            side: TailSide::Right,
            seed: SeedKind::PdfSeed,
            window: (1.0, 100.0),
            far: (10.0, 100.0),
        },
        Catalog {
            name: "beta-prime(2.1, 1.3)",
            dist: Arc::new(make_beta_prime(2.1, 1.3)?),
            side: TailSide::Right,
            seed: SeedKind::ShiftedPdfSeed,
            window: (1.0, 1e4),
            far: (100.0, 1e4),
        },
        Catalog {
            name: "ncchi2(10, 2) left",
            dist: Arc::new(make_noncentral_chi2(10.0, 2.0)?),
            side: TailSide::Left,
            seed: SeedKind::ShiftedPdfSeed,
            window: (0.01, 0.5),
            far: (0.01, 0.05),
        },
    ])
}

fn iterates(c: &Catalog, count: usize) -> Result<Vec<BoundIterate>> {
    let mut its = vec![make_seed(c.dist.clone(), c.seed.clone(), c.side)?];
    for _ in 1..count {
        let next = its[its.len() - 1].iterate()?;
        its.push(next);
    }
    Ok(its)
}

fn sandwich(c: &Catalog, tols: &VerifyTolerances) -> Result<CheckResult> {
    let its = iterates(c, 5)?;
    let grid = GridSpec::default();
    let pts = grid_points(c.window.0, c.window.1, &GridSpec::geometric(100))?;
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for it in &its {
        let cl = classify(it, c.window, &grid, tols.classify)?;
        let sign = match cl.verdict {
            Verdict::Upper => 1.0,
            Verdict::Lower => -1.0,
            _ => continue,
        };
        for &x in pts.iter().filter(|&&x| cl.covers(x, c.side)) {
            let lp = it.ln_value(x)?;
            let lo = oracle_ln_tail(&c.dist, x, c.side)?;
            // violation amount in log space, positive when the bound is on the wrong side
            worst = worst.max(-sign * (lp - lo));
            checked += 1;
        }
    }
    Ok(check(
        format!("sandwich {}", c.name),
        checked > 0 && worst <= tols.sandwich,
        format!("{checked} comparisons, worst wrong-side log gap {worst:.2e}"),
    ))
}

fn classifications(c: &Catalog, its: &[BoundIterate], tols: &VerifyTolerances) -> Result<Vec<Classification>> {
    its.iter().map(|it| classify(it, c.window, &GridSpec::default(), tols.classify)).collect()
}

/// Successive upper iterates decrease and successive lower iterates increase.
fn ordering(c: &Catalog, tols: &VerifyTolerances) -> Result<CheckResult> {
    let its = iterates(c, 5)?;
    let cls = classifications(c, &its, tols)?;
    let pts = grid_points(c.far.0, c.far.1, &GridSpec::geometric(64))?;
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for kind in [Verdict::Upper, Verdict::Lower] {
        let idx: Vec<usize> = (0..its.len()).filter(|&i| cls[i].verdict == kind).collect();
        for w in idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &x in pts.iter().filter(|&&x| cls[a].covers(x, c.side) && cls[b].covers(x, c.side)) {
                let d = its[b].ln_value(x)? - its[a].ln_value(x)?;
                worst = worst.max(if kind == Verdict::Upper { d } else { -d });
            }
            pairs += 1;
        }
    }
    Ok(check(
        format!("ordering {}", c.name),
        pairs > 0 && worst <= tols.sandwich,
        format!("{pairs} same-kind pairs, worst loosening {worst:.2e}"),
    ))
}

/// R_i = |P_{i+1} − P_i| / P_i shrinks with i deep in the tail.
fn tightness(c: &Catalog) -> Result<CheckResult> {
    let its = iterates(c, 5)?;
    let pts = grid_points(c.far.0, c.far.1, &GridSpec::geometric(64))?;
    let mut bad = 0;
    for &x in &pts {
        let rs = its[..4].iter().map(|it| convergence_rate(it, x)).collect::<Result<Vec<_>>>()?;
        if rs.windows(2).any(|w| !(w[1] < w[0])) {
            bad += 1;
        }
    }
    Ok(check(
        format!("tightness {}", c.name),
        bad == 0,
        format!("R_0 > R_1 > R_2 > R_3 at {}/{} points of [{}, {}]", pts.len() - bad, pts.len(), c.far.0, c.far.1),
    ))
}

fn bounds_suite(tols: &VerifyTolerances) -> Vec<CheckResult> {
    let mut out = Vec::new();
    match catalog() {
        Ok(cat) => {
            for c in &cat {
                out.push(from_result("sandwich", sandwich(c, tols)));
                out.push(from_result("ordering", ordering(c, tols)));
                out.push(from_result("tightness", tightness(c)));
            }
        }
        Err(e) => out.push(check("catalog", false, format!("error: {e}"))),
    }

    let r = (|| {
        let d = Arc::new(make_gaussian(0.0, 1.0)?);
        let c = Catalog { name: "", dist: d, side: TailSide::Right, seed: SeedKind::PdfSeed, window: (0.05, 20.0), far: (1.0, 20.0) };
        let its = iterates(&c, 5)?;
        let cls = its
            .iter()
            .map(|it| classify(it, c.window, &GridSpec::uniform(2048), tols.classify))
            .collect::<Result<Vec<_>>>()?;
        let v: String = cls.iter().map(|c| c.verdict.letter()).collect();
        let expected = (2f64.sqrt() - 1.0).sqrt();
        let t2 = cls[2].threshold;
        Ok(check(
            "gaussian verdict sequence",
            v == "ULULU" && (t2 - expected).abs() <= tols.threshold,
            format!("verdicts {v}, P2 threshold {t2:.9} vs √(√2−1) = {expected:.9}"),
        ))
    })();
    out.push(from_result("gaussian verdict sequence", r));

    let r = (|| {
        let it = make_seed(make_gaussian(0.0, 1.0)?, SeedKind::PdfSeed, TailSide::Right)?;
        let r0 = convergence_rate(&it, 2.0)?;
        Ok(check("gaussian R0(2) = 1/4", (r0 - 0.25).abs() <= tols.identity, format!("R0 = {r0:.15}")))
    })();
    out.push(from_result("gaussian R0(2) = 1/4", r));

    let r = (|| {
        let d = make_exponential(1.0)?;
        let h = markov_h(1.0, f64::INFINITY)?;
        let c = classify_h(&d, &h, (0.5, 40.0), &GridSpec::uniform(2048), tols.classify)?;
        Ok(check("markov on exponential", c.verdict == Verdict::Upper, format!("verdict {:?} from x = {}", c.verdict, c.threshold)))
    })();
    out.push(from_result("markov on exponential", r));

    let r = (|| {
        let d = make_gaussian(0.0, 1.0)?;
        let mgf: MgfFn = Arc::new(|t: f64| (0.5 * t * t).exp());
        let grid: Vec<f64> = (1..=60).map(|i| 0.1 * i as f64).collect();
        let h = chernoff_h(mgf, &grid, f64::INFINITY)?;
        let c = classify_h(&d, &h, (1.0, 6.0), &GridSpec::uniform(512), tols.classify)?;
        Ok(check("chernoff on gaussian", c.verdict == Verdict::Upper, format!("verdict {:?} from x = {}", c.verdict, c.threshold)))
    })();
    out.push(from_result("chernoff on gaussian", r));
    out
}

// ---------------------------------------------------------------- awgn

fn awgn_suite(tols: &VerifyTolerances) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for omega in [0.5, 1.0, 2.0, 5.0] {
        let name = format!("debye identities omega={omega}");
        let r = (|| {
            let l0 = 1.0 + 1.0 / omega;
            let d = debye_internals(omega, l0)?;
            let h = 1e-5;
            let fd = (debye_internals(omega, l0 + h)?.phi - debye_internals(omega, l0 - h)?.phi) / (2.0 * h);
            let phi2 = -omega / (2.0 * (omega + 2.0));
            let jp = -(omega + 1.0) / (omega + 2.0);
            let ok = d.phi.abs() <= 1e-12
                && fd.abs() <= tols.fd
                && (d.phi2 - phi2).abs() <= tols.identity
                && (d.jprime - jp).abs() <= tols.identity;
            Ok(check(
                &name,
                ok,
                format!(
                    "Φ(λ₀) = {:.1e}, FD Φ′(λ₀) = {fd:.1e}, Φ″ error {:.1e}, J′ error {:.1e}",
                    d.phi,
                    (d.phi2 - phi2).abs(),
                    (d.jprime - jp).abs()
                ),
            ))
        })();
        out.push(from_result(&name, r));
    }

    for (omega, eps) in [(1.0, 1e-3), (5.0, 1e-5)] {
        let name = format!("awgn sandwich omega={omega} eps={eps}");
        let r = (|| {
            let cfg = AwgnConfig::new(200, omega, eps)?;
            let p = converse_bounds(&cfg)?;
            let o = oracle_converse(&cfg)?;
            let ok = p.r_lower <= o && o <= p.r_upper;
            Ok(check(&name, ok, format!("n = 200: {:.8} ≤ {o:.8} ≤ {:.8}", p.r_lower, p.r_upper)))
        })();
        out.push(from_result(&name, r));

        let name = format!("awgn gap shrinks omega={omega} eps={eps}");
        let r = (|| {
            let mut gaps = Vec::new();
            for n in [200u64, 500, 1000, 2000, 10_000, 100_000] {
                let p = converse_bounds(&AwgnConfig::new(n, omega, eps)?)?;
                gaps.push(p.r_upper - p.r_lower);
            }
            let ok = gaps.iter().all(|&g| g >= 0.0) && gaps.windows(2).all(|w| w[1] < w[0]);
            Ok(check(&name, ok, format!("r_upper − r_lower from n = 200 to 1e5: {:.2e} → {:.2e}", gaps[0], gaps[gaps.len() - 1])))
        })();
        out.push(from_result(&name, r));
    }
    out
}

// ---------------------------------------------------------------- csv

fn csv_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let r = (|| {
        let req = BoundsRequest {
            dist: Arc::new(make_noncentral_chi2(10.0, 2.0)?),
            side: TailSide::Left,
            seed: SeedKind::ShiftedPdfSeed,
            iters: 3,
            x_min: 0.01,
            x_max: 0.5,
            points: 64,
            tol: DEFAULT_TOL,
            log_values: false,
            timestamp: Some("fixed".into()),
        };
        let a = bounds_table(&req)?.render();
        let b = bounds_table(&req)?.render();
        Ok(check("bounds csv byte-identical rerun", a == b, format!("{} bytes", a.len())))
    })();
    out.push(from_result("bounds csv byte-identical rerun", r));

    let r = (|| {
        let req = AwgnRequest {
            omega: 1.0,
            eps: 1e-3,
            ns: vec![100, 1000, 10_000],
            oracle: true,
            oracle_max_n: 200,
            timestamp: Some("fixed".into()),
        };
        let a = awgn_table(&req)?.render();
        let b = awgn_table(&req)?.render();
        Ok(check("awgn csv byte-identical rerun", a == b, format!("{} bytes", a.len())))
    })();
    out.push(from_result("awgn csv byte-identical rerun", r));
    out
}
