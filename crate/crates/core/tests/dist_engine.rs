use std::sync::Arc;

use tailkit::dist::{
    beta_prime_closed_iterate, gaussian_closed_iterate, gaussian_closed_threshold, make_beta_prime, make_exponential,
    make_gaussian, make_noncentral_chi2, ncchi2_left_closed_p0, ncchi2_left_printed_p0_ln, DistributionSpec,
};
use tailkit::engine::{
    classify, convergence_rate, make_seed, run_algorithm, BoundIterate, GridSpec, SeedKind, StopReason, TailSide, Verdict, DEFAULT_TOL,
};
use tailkit::oracle::{integrate, oracle_ln_tail, oracle_tail};
use tailkit::specfun::ln_gamma;
use tailkit::Error;

#[test]
fn beta_prime_density_normalized() {
    let d = make_beta_prime(2.1, 1.3).unwrap();
    // x = t/(1−t) maps (0, 1) onto (0, ∞).
    let q = integrate(
        |t| {
            let x = t / (1.0 - t);
            d.pdf(x) / ((1.0 - t) * (1.0 - t))
        },
        0.0,
        1.0,
        1e-12,
        10_000,
    )
    .unwrap();
    assert!((q.value - 1.0).abs() < 1e-8, "{}", q.value);
}

#[test]
fn ncchi2_density_against_mixture() {
    let (k, s, x) = (10.0f64, 2.0f64, 5.0f64);
    let d = make_noncentral_chi2(k, s).unwrap();
    let mut sum = 0.0;
    for j in 0..80 {
        let jf = j as f64;
        let h = 0.5 * (k + 2.0 * jf);
        let ln_pois = -0.5 * s + jf * (0.5 * s).ln() - ln_gamma(jf + 1.0);
        let ln_chi = (h - 1.0) * x.ln() - 0.5 * x - h * 2f64.ln() - ln_gamma(h);
        sum += (ln_pois + ln_chi).exp();
    }
    assert!((d.pdf(x) - sum).abs() < 1e-10);
    assert!((d.pdf(x) - 0.039_751_837_812_281_75).abs() < 1e-12);
}

#[test]
fn gaussian_seed_values() {
    let g = Arc::new(make_gaussian(0.0, 1.0).unwrap());
    let p0 = make_seed(g.clone(), SeedKind::PdfSeed, TailSide::Right).unwrap();
    let p1 = p0.iterate().unwrap();
    let p2 = p1.iterate().unwrap();
    assert!((p0.value(2.0).unwrap() - 0.026_995_48).abs() < 1e-8);
    assert!((p1.value(2.0).unwrap() - 0.021_596_39).abs() < 1e-8);
    let tail = oracle_tail(&g, 2.0, TailSide::Right).unwrap();
    assert!(p1.value(2.0).unwrap() <= tail && tail <= p0.value(2.0).unwrap());
    let closed = gaussian_closed_iterate(0.0, 1.0, 2, 2.0).unwrap();
    assert!((p2.value(2.0).unwrap() - closed).abs() < 1e-9);
}

#[test]
fn gaussian_seed_derivative_matches_finite_difference() {
    let g = make_gaussian(0.0, 1.0).unwrap();
    let p0 = make_seed(g, SeedKind::PdfSeed, TailSide::Right).unwrap();
    let j = p0.jet(2.0, 1).unwrap();
    let h = 1e-5;
    let fd = (gaussian_closed_iterate(0.0, 1.0, 0, 2.0 + h).unwrap() - gaussian_closed_iterate(0.0, 1.0, 0, 2.0 - h).unwrap())
        / (2.0 * h);
    assert!((j.value() - 0.026_995_48).abs() < 1e-8);
    assert!((j.derivative(1) - fd).abs() < 1e-9);
    // −φ(2)(1 + 1/4)
    let phi2 = (-2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
    assert!((j.derivative(1) + 1.25 * phi2).abs() < 1e-12);
}

#[test]
fn printed_closed_forms() {
    let bp = make_beta_prime(2.1, 1.3).unwrap();
    let p0 = make_seed(bp, SeedKind::ShiftedPdfSeed, TailSide::Right).unwrap();
    let v = p0.value(10.0).unwrap();
    assert!((v - beta_prime_closed_iterate(2.1, 1.3, 0, 10.0).unwrap()).abs() < 1e-10);
    let p1 = p0.iterate().unwrap();
    assert!((p1.value(10.0).unwrap() / beta_prime_closed_iterate(2.1, 1.3, 1, 10.0).unwrap() - 1.0).abs() < 1e-10);
    let tail = oracle_tail(&p0.dist, 10.0, TailSide::Right).unwrap();
    assert!(v.is_finite() && v >= tail);

    let nc = Arc::new(make_noncentral_chi2(10.0, 2.0).unwrap());
    let shifted = make_seed(nc.clone(), SeedKind::ShiftedPdfSeed, TailSide::Left).unwrap();
    let v = shifted.value(1.0).unwrap();
    assert!((v - ncchi2_left_closed_p0(10.0, 2.0, 1.0).unwrap()).abs() < 1e-9);
    assert!(v > 0.0 && v < 1.0 && v >= oracle_tail(&nc, 1.0, TailSide::Left).unwrap());
    let plain = make_seed(nc, SeedKind::PdfSeed, TailSide::Left).unwrap();
    assert!((plain.ln_value(1.0).unwrap() - ncchi2_left_printed_p0_ln(10.0, 2.0, 1.0).unwrap()).abs() < 1e-9);
}

fn chain(d: DistributionSpec, seed: SeedKind, side: TailSide) -> Vec<BoundIterate> {
    let mut its = vec![make_seed(d, seed, side).unwrap()];
    for _ in 0..3 {
        let next = its.last().unwrap().iterate().unwrap();
        its.push(next);
    }
    its
}

fn ln_gaps(its: &[BoundIterate], x: f64) -> Vec<f64> {
    let t = oracle_ln_tail(&its[0].dist, x, its[0].side).unwrap();
    its.iter().map(|it| it.ln_value(x).unwrap() - t).collect()
}

fn geometric(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| a * (b / a).powf(k as f64 / (n - 1) as f64))
}

#[test]
fn sandwich_on_verified_windows() {
    let cases = [
        (make_gaussian(-1.7, 1.9).unwrap(), SeedKind::PdfSeed, TailSide::Right, (1.0, 30.0)),
        (make_beta_prime(2.1, 1.3).unwrap(), SeedKind::ShiftedPdfSeed, TailSide::Right, (10.0, 1e3)),
        (make_noncentral_chi2(10.0, 2.0).unwrap(), SeedKind::ShiftedPdfSeed, TailSide::Left, (0.01, 0.5)),
    ];
    for (d, seed, side, (a, b)) in cases {
        let its = chain(d, seed, side);
        for x in geometric(a, b, 100) {
            let g = ln_gaps(&its, x);
            assert!(g[0] >= -1e-9 && g[2] >= -1e-9, "{} upper at {x}: {g:?}", its[0].dist.name);
            assert!(g[1] <= 1e-9 && g[3] <= 1e-9, "{} lower at {x}: {g:?}", its[0].dist.name);
        }
    }
}

#[test]
fn nested_ordering_in_the_far_tail() {
    let cases = [
        (make_gaussian(-1.7, 1.9).unwrap(), SeedKind::PdfSeed, TailSide::Right, (3.0, 100.0)),
        (make_beta_prime(2.1, 1.3).unwrap(), SeedKind::ShiftedPdfSeed, TailSide::Right, (100.0, 1e4)),
        (make_noncentral_chi2(10.0, 2.0).unwrap(), SeedKind::ShiftedPdfSeed, TailSide::Left, (0.01, 1.0)),
    ];
    for (d, seed, side, (a, b)) in cases {
        let its = chain(d, seed, side);
        for x in geometric(a, b, 100) {
            let g = ln_gaps(&its, x);
            assert!(g[1] <= g[3] && g[3] <= 0.0 && 0.0 <= g[2] && g[2] <= g[0], "{} at {x}: {g:?}", its[0].dist.name);
        }
    }
}

#[test]
fn gaussian_classification_thresholds() {
    let g = make_gaussian(0.0, 1.0).unwrap();
    let grid = GridSpec::uniform(2048);
    let mut it = make_seed(g, SeedKind::PdfSeed, TailSide::Right).unwrap();
    let expected = [Verdict::Upper, Verdict::Lower, Verdict::Upper];
    for (i, want) in expected.iter().enumerate() {
        let c = classify(&it, (0.05, 20.0), &grid, DEFAULT_TOL).unwrap();
        assert_eq!(c.verdict, *want, "P{i}");
        let thr = gaussian_closed_threshold(0.0, 1.0, i).max(0.05);
        assert!((c.threshold - thr).abs() < 0.02, "P{i} threshold {}", c.threshold);
        it = it.iterate().unwrap();
    }
}

#[test]
fn algorithm_sequences() {
    let r = run_algorithm(
        make_gaussian(0.0, 1.0).unwrap(),
        SeedKind::PdfSeed,
        TailSide::Right,
        2.0,
        4,
        (0.05, 20.0),
        &GridSpec::uniform(1024),
        DEFAULT_TOL,
    )
    .unwrap();
    let v: Vec<Verdict> = r.steps.iter().map(|s| s.classification.verdict).collect();
    assert_eq!(v, [Verdict::Upper, Verdict::Lower, Verdict::Upper, Verdict::Lower, Verdict::Upper]);

    let r = run_algorithm(
        make_beta_prime(2.1, 1.3).unwrap(),
        SeedKind::ShiftedPdfSeed,
        TailSide::Right,
        100.0,
        4,
        (1.0, 1e4),
        &GridSpec::geometric(1024),
        DEFAULT_TOL,
    )
    .unwrap();
    let v: Vec<Verdict> = r.steps.iter().map(|s| s.classification.verdict).collect();
    assert_eq!(v, [Verdict::Upper, Verdict::Lower, Verdict::Upper, Verdict::Lower, Verdict::Upper]);
    assert_eq!(r.stop, StopReason::MaxIter);
    assert_eq!((r.lower, r.upper), (Some(3), Some(4)));

    let r = run_algorithm(
        make_exponential(1.0).unwrap(),
        SeedKind::PdfSeed,
        TailSide::Right,
        1.0,
        4,
        (0.5, 30.0),
        &GridSpec::default(),
        DEFAULT_TOL,
    )
    .unwrap();
    assert!(matches!(r.stop, StopReason::Exact { .. }));
}

#[test]
fn gaussian_rate_at_two() {
    let g = make_gaussian(0.0, 1.0).unwrap();
    let p0 = make_seed(g, SeedKind::PdfSeed, TailSide::Right).unwrap();
    assert!((convergence_rate(&p0, 2.0).unwrap() - 0.25).abs() < 1e-10);
    for x in [3.0, 5.0, 11.0] {
        assert!((convergence_rate(&p0, x).unwrap() - 1.0 / (x * x)).abs() < 1e-10);
    }
}

#[test]
fn seed_errors() {
    let g = make_gaussian(0.0, 1.0).unwrap();
    assert!(matches!(make_seed(g.clone(), SeedKind::ShiftedPdfSeed, TailSide::Right), Err(Error::SeedIncompatible(_))));
    let p0 = make_seed(g, SeedKind::PdfSeed, TailSide::Right).unwrap();
    assert!(classify(&p0, (1.0, 1.0), &GridSpec::default(), DEFAULT_TOL).is_err());
    assert!(make_gaussian(0.0, -1.0).is_err());
    assert!(make_beta_prime(0.0, 1.0).is_err());
    assert!(make_noncentral_chi2(10.0, -2.0).is_err());
}
