//! Acceptance criteria, one pass/fail line each.
//!
//! Criteria listed in `KNOWN_RED` fail as specified; see the README. The
//! process exits non-zero if any other criterion fails or if a known-red
//! criterion starts passing.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use tailkit::awgn::{
    converse_bounds, debye_internals, lambda_asymptotic, oracle_converse, solve_lambda, AwgnConfig, Which,
};
use tailkit::dist::{gaussian_closed_iterate_ln, make_beta_prime, make_gaussian, make_noncentral_chi2, DistributionSpec};
use tailkit::engine::{
    classify, convergence_rate, grid_points, make_seed, run_algorithm, BoundIterate, GridSpec, SeedKind, TailSide,
    Verdict, DEFAULT_TOL,
};
use tailkit::oracle::oracle_ln_tail;
use tailkit::report::log_spaced_ns;
use tailkit::verify::{run_suite, Suite, VerifyTolerances};
use tailkit::Result;

const KNOWN_RED: [u8; 2] = [4, 8];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn seed_chain(dist: Arc<DistributionSpec>, seed: SeedKind, side: TailSide, count: usize) -> Result<Vec<BoundIterate>> {
    let mut its = vec![make_seed(dist, seed, side)?];
    while its.len() < count {
        let next = its[its.len() - 1].iterate()?;
        its.push(next);
    }
    Ok(its)
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn c1() -> Result<Outcome> {
    let (mu, sigma) = (-1.7, 1.9);
    let its = seed_chain(Arc::new(make_gaussian(mu, sigma)?), SeedKind::PdfSeed, TailSide::Right, 4)?;
    let xs: Vec<f64> = (0..50).map(|i| 100f64.powf(i as f64 / 49.0)).collect();
    let mut worst = 0.0f64;
    for (i, it) in its.iter().enumerate() {
        for &x in &xs {
            let d = (it.ln_value(x)? - gaussian_closed_iterate_ln(mu, sigma, i, x)?).exp_m1().abs();
            worst = worst.max(d);
        }
    }
    outcome(worst <= 1e-9, format!("P0..P3 vs printed forms, max relative error {worst:.2e} (bound 1e-9)"))
}

fn c2() -> Result<Outcome> {
    let window = (0.05, 20.0);
    let r = run_algorithm(
        make_gaussian(0.0, 1.0)?,
        SeedKind::PdfSeed,
        TailSide::Right,
        2.0,
        4,
        window,
        &GridSpec::uniform(2048),
        DEFAULT_TOL,
    )?;
    let letters: String = r.steps.iter().map(|s| s.classification.verdict.letter()).collect();
    let th: Vec<f64> = r.steps.iter().map(|s| s.classification.threshold).collect();
    let x2 = (2f64.sqrt() - 1.0).sqrt();
    // P0 and P1 hold for every x > 0, so they verify from the window start
    let ok = letters == "ULULU" && th[0] == window.0 && th[1] == window.0 && (th[2] - x2).abs() <= 1e-6;
    outcome(
        ok,
        format!(
            "verdicts {letters}; thresholds P0 {:.3} P1 {:.3} P2 {:.9} (√(√2−1) = {x2:.9}) P3 {:.6} P4 {:.6}",
            th[0], th[1], th[2], th[3], th[4]
        ),
    )
}

fn c3() -> Result<Outcome> {
    let cases = [
        ("gaussian", Arc::new(make_gaussian(-1.7, 1.9)?), TailSide::Right, SeedKind::PdfSeed, (1.0, 100.0)),
        ("beta-prime", Arc::new(make_beta_prime(2.1, 1.3)?), TailSide::Right, SeedKind::ShiftedPdfSeed, (1.0, 100.0)),
        ("ncchi2", Arc::new(make_noncentral_chi2(10.0, 2.0)?), TailSide::Left, SeedKind::ShiftedPdfSeed, (0.01, 0.5)),
    ];
    let tol = 1e-9 + 1e-12;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, dist, side, seed, window) in cases {
        let its = seed_chain(dist.clone(), seed, side, 5)?;
        let pts = grid_points(window.0, window.1, &GridSpec::geometric(100))?;
        let (mut n, mut worst) = (0, f64::NEG_INFINITY);
        for it in &its {
            let c = classify(it, window, &GridSpec::default(), DEFAULT_TOL)?;
            let sign = match c.verdict {
                Verdict::Upper => 1.0,
                Verdict::Lower => -1.0,
                _ => continue,
            };
            for &x in pts.iter().filter(|&&x| c.covers(x, side)) {
                let gap = it.ln_value(x)? - oracle_ln_tail(&dist, x, side)?;
                worst = worst.max(-sign * gap);
                n += 1;
            }
        }
        ok &= n > 0 && worst <= tol;
        parts.push(format!("{name}: {n} comparisons, worst violation {worst:.1e}"));
    }
    outcome(ok, parts.join("; "))
}

fn slopes(dist: Arc<DistributionSpec>, seed: SeedKind, side: TailSide, a: f64, b: f64) -> Result<Vec<f64>> {
    let its = seed_chain(dist, seed, side, 4)?;
    let xs = grid_points(a, b, &GridSpec::geometric(64))?;
    its.iter()
        .map(|it| {
            let ys = xs.iter().map(|&x| convergence_rate(it, x)).collect::<Result<Vec<_>>>()?;
            Ok(ls_slope(&xs, &ys))
        })
        .collect()
}

fn fmt_slopes(s: &[f64]) -> String {
    s.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")
}

fn c4() -> Result<Outcome> {
    let g = slopes(Arc::new(make_gaussian(-1.7, 1.9)?), SeedKind::PdfSeed, TailSide::Right, 10.0, 100.0)?;
    let bp = slopes(Arc::new(make_beta_prime(2.1, 1.3)?), SeedKind::ShiftedPdfSeed, TailSide::Right, 10.0, 100.0)?;
    let nc = slopes(Arc::new(make_noncentral_chi2(10.0, 2.0)?), SeedKind::ShiftedPdfSeed, TailSide::Left, 0.01, 0.5)?;
    let within = |s: &[f64], target: &dyn Fn(usize) -> f64| s.iter().enumerate().all(|(i, v)| (v - target(i)).abs() <= 0.2);
    let g_ok = within(&g, &|i| -2.0 * (i as f64 + 1.0));
    let bp_ok = within(&bp, &|_| -1.0);
    let nc_ok = within(&nc, &|_| 1.0);
    // context only: the same slopes away from the finite-x offsets
    let g01 = slopes(Arc::new(make_gaussian(0.0, 1.0)?), SeedKind::PdfSeed, TailSide::Right, 10.0, 100.0)?;
    let bp_far = slopes(Arc::new(make_beta_prime(2.1, 1.3)?), SeedKind::ShiftedPdfSeed, TailSide::Right, 100.0, 1000.0)?;
    outcome(
        g_ok && bp_ok && nc_ok,
        format!(
            "gaussian(-1.7,1.9) [{}] {}; beta-prime [{}] {}; ncchi2 [{}] {}; for reference gaussian(0,1) [{}], beta-prime on [100,1000] [{}]",
            fmt_slopes(&g),
            if g_ok { "ok" } else { "off" },
            fmt_slopes(&bp),
            if bp_ok { "ok" } else { "off" },
            fmt_slopes(&nc),
            if nc_ok { "ok" } else { "off" },
            fmt_slopes(&g01),
            fmt_slopes(&bp_far),
        ),
    )
}

fn c5() -> Result<Outcome> {
    let it = make_seed(make_gaussian(0.0, 1.0)?, SeedKind::PdfSeed, TailSide::Right)?;
    let r0 = convergence_rate(&it, 2.0)?;
    outcome((r0 - 0.25).abs() <= 1e-10, format!("R0(2) = {r0:.16}"))
}

fn c6() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for om in [0.5, 1.0, 2.0, 5.0] {
        let l0 = 1.0 + 1.0 / om;
        let d = debye_internals(om, l0)?;
        let h = 1e-5;
        let fd = (debye_internals(om, l0 + h)?.phi - debye_internals(om, l0 - h)?.phi) / (2.0 * h);
        let e2 = (d.phi2_at_lambda0 + om / (2.0 * (om + 2.0))).abs();
        let ej = (d.jprime_at_lambda0 + (om + 1.0) / (om + 2.0)).abs();
        ok &= d.phi.abs() <= 1e-12 && fd.abs() <= 1e-9 && e2 <= 1e-10 && ej <= 1e-10;
        parts.push(format!("Ω={om}: |Φ| {:.0e} |FD Φ′| {:.0e} Φ″ {e2:.0e} J′ {ej:.0e}", d.phi.abs(), fd.abs()));
    }
    outcome(ok, parts.join("; "))
}

const PAIRS: [(f64, f64); 2] = [(1.0, 1e-3), (5.0, 1e-5)];

fn c7() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (om, eps) in PAIRS {
        let mut gaps = Vec::new();
        let mut inside = 0;
        for n in [200u64, 500, 1000, 2000] {
            let cfg = AwgnConfig::new(n, om, eps)?;
            let p = converse_bounds(&cfg)?;
            let o = oracle_converse(&cfg)?;
            if p.r_lower <= o && o <= p.r_upper {
                inside += 1;
            }
            gaps.push(p.r_upper - p.r_lower);
        }
        let mono = gaps.windows(2).all(|w| w[1] < w[0]);
        ok &= inside == 4 && mono;
        parts.push(format!(
            "Ω={om} ε={eps}: oracle inside {inside}/4, gap {}",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(" > ")
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c8() -> Result<Outcome> {
    let ns = log_spaced_ns(1000, 1_000_000, 31)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (om, eps) in PAIRS {
        let mut closer = 0;
        let mut total = 0;
        let mut first_bad = None;
        let mut last = None;
        for &n in &ns {
            let p = converse_bounds(&AwgnConfig::new(n, om, eps)?)?;
            if n >= 10_000 {
                let mid = 0.5 * (p.r_lower + p.r_upper);
                total += 1;
                if (p.r_asym - mid).abs() < (p.r_na - mid).abs() {
                    closer += 1;
                } else if first_bad.is_none() {
                    first_bad = Some(n);
                }
            }
            last = Some(p);
        }
        let p = last.expect("nonempty n grid");
        let cgap = p.capacity - p.r_asym;
        ok &= closer == total && cgap.abs() <= 5e-3;
        parts.push(format!(
            "Ω={om} ε={eps}: r_asym closer than r_na at {closer}/{total} n ≥ 1e4 (first miss {}), C − r_asym at 1e6 = {cgap:.2e}",
            first_bad.map_or("none".to_string(), |n| n.to_string())
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c9() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (om, eps) in PAIRS {
        let err = |n: u64| -> Result<f64> {
            let cfg = AwgnConfig::new(n, om, eps)?;
            Ok((solve_lambda(&cfg, Which::P0)? - lambda_asymptotic(&cfg)?).abs())
        };
        let (e4, e6) = (err(10_000)?, err(1_000_000)?);
        let ratio = e4 / e6;
        ok &= ratio >= 5.0;
        parts.push(format!("Ω={om} ε={eps}: {e4:.2e} → {e6:.2e}, ratio {ratio:.1}"));
    }
    outcome(ok, parts.join("; "))
}

fn c10() -> Result<Outcome> {
    let results = run_suite(Suite::All, &VerifyTolerances::default());
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    outcome(
        failed.is_empty(),
        format!("{}/{} checks pass{}", results.len() - failed.len(), results.len(), if failed.is_empty() { String::new() } else { format!(", failing: {}", failed.join(", ")) }),
    )
}

fn main() -> ExitCode {
    type Criterion = (u8, &'static str, fn() -> Result<Outcome>, Duration);
    let criteria: [Criterion; 10] = [
        (1, "closed-form agreement", c1, Duration::from_secs(1)),
        (2, "verdict sequence", c2, Duration::from_secs(5)),
        (3, "oracle sandwich", c3, Duration::from_secs(30)),
        (4, "convergence-rate slopes", c4, Duration::from_secs(30)),
        (5, "exact rate value", c5, Duration::MAX),
        (6, "Debye identities", c6, Duration::MAX),
        (7, "AWGN sandwich vs oracle", c7, Duration::from_secs(120)),
        (8, "asymptotic tightness", c8, Duration::MAX),
        (9, "lambda consistency", c9, Duration::MAX),
        (10, "property suites", c10, Duration::from_secs(120)),
    ];
    let mut unexpected = Vec::new();
    let mut red = Vec::new();
    for (id, title, run, budget) in criteria {
        let start = Instant::now();
        let res = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match res {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = if budget == Duration::MAX {
            format!("{:.2} s", elapsed.as_secs_f64())
        } else {
            format!("{:.2} s of {} s", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("criterion {id:>2} {} {title}: {detail} [{timing}]", if passed { "PASS" } else { "FAIL" });
        if !passed {
            red.push(id);
        }
        if passed == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    println!("{}/10 criteria pass; red: {:?}; known red: {:?}", 10 - red.len(), red, KNOWN_RED);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
