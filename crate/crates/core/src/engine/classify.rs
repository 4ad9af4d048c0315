use super::{BoundIterate, TailSide};
use crate::error::{param, Error, Result};

/// Default tolerance on f-normalized condition residuals.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default bound on the edge-most value for the numeric limit check.
pub const DEFAULT_LIMIT_TOL: f64 = 1e-2;

const MIN_POINTS: usize = 64;
const REFINE_REL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Geometric,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Geometric spacing needs a positive window; otherwise uniform is used.
    pub spacing: Spacing,
    pub limit_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 512, spacing: Spacing::Geometric, limit_tol: DEFAULT_LIMIT_TOL }
    }
}

impl GridSpec {
    pub fn uniform(points: usize) -> GridSpec {
        GridSpec { points, spacing: Spacing::Uniform, ..GridSpec::default() }
    }

    pub fn geometric(points: usize) -> GridSpec {
        GridSpec { points, spacing: Spacing::Geometric, ..GridSpec::default() }
    }
}

pub fn grid_points(a: f64, b: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::WindowTooSmall(format!("degenerate window [{a}, {b}]")));
    }
    if grid.points < MIN_POINTS {
        return Err(param(format!("grid needs at least {MIN_POINTS} points, got {}", grid.points)));
    }
    let n = grid.points;
    let last = (n - 1) as f64;
    let mut pts: Vec<f64> = if grid.spacing == Spacing::Geometric && a > 0.0 {
        let r = (b / a).ln();
        (0..n).map(|i| a * (r * i as f64 / last).exp()).collect()
    } else {
        (0..n).map(|i| a + (b - a) * i as f64 / last).collect()
    };
    pts[0] = a;
    pts[n - 1] = b;
    Ok(pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Upper,
    Lower,
    Exact,
    Invalid,
}

impl Verdict {
    pub fn letter(self) -> char {
        match self {
            Verdict::Upper => 'U',
            Verdict::Lower => 'L',
            Verdict::Exact => 'E',
            Verdict::Invalid => 'X',
        }
    }
}

/// Condition values at one grid point.
///
/// `rho` is the governing residual divided by f and signed so that
/// `rho ≥ 0` means "upper" on either side: −(P′+f)/f on the right,
/// (P′−f)/f on the left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState {
    /// Positivity and generator monotonicity hold.
    pub valid: bool,
    pub rho: f64,
    /// Residual of the predecessor, when there is one.
    pub rho_prev: Option<f64>,
    pub ln_value: f64,
}

impl PointState {
    fn upper(&self, tol: f64) -> bool {
        self.valid && self.rho >= -tol
    }

    fn lower(&self, tol: f64) -> bool {
        self.valid && self.rho <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// From here on (right tail) or up to here (left tail) the checks pass; NaN when invalid.
    pub threshold: f64,
    pub upper_threshold: Option<f64>,
    pub lower_threshold: Option<f64>,
    /// Tightness condition for a flip into this verdict, on the verified region.
    pub tightness_ok: Option<bool>,
    /// (x, rho) samples over the whole grid; NaN where evaluation failed.
    pub residuals: Vec<(f64, f64)>,
    pub limit_ok: bool,
    pub window: (f64, f64),
    pub tol: f64,
}

impl Classification {
    /// Whether x lies in the verified region.
    pub fn covers(&self, x: f64, side: TailSide) -> bool {
        match (self.verdict, side) {
            (Verdict::Invalid, _) => false,
            (_, TailSide::Right) => x >= self.threshold && x <= self.window.1,
            (_, TailSide::Left) => x <= self.threshold && x >= self.window.0,
        }
    }
}

/// Threshold of the region where `pred` holds through to the tail end.
fn region<F>(pts: &[f64], ok: &[bool], side: TailSide, width: f64, pred: F) -> Option<f64>
where
    F: Fn(f64) -> bool,
{
    let n = pts.len();
    let (mut good, mut bad) = match side {
        TailSide::Right => match ok.iter().rposition(|&b| !b) {
            None => return Some(pts[0]),
            Some(j) if j == n - 1 => return None,
            Some(j) => (pts[j + 1], pts[j]),
        },
        TailSide::Left => match ok.iter().position(|&b| !b) {
            None => return Some(pts[n - 1]),
            Some(0) => return None,
            Some(j) => (pts[j - 1], pts[j]),
        },
    };
    while (good - bad).abs() > REFINE_REL * width {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// Classifies from a point evaluator; shared by iterates and direct h candidates.
pub fn classify_points<E>(eval: E, side: TailSide, window: (f64, f64), grid: &GridSpec, tol: f64) -> Result<Classification>
where
    E: Fn(f64) -> Result<PointState>,
{
    let (a, b) = window;
    let pts = grid_points(a, b, grid)?;
    let states: Vec<Option<PointState>> = pts.iter().map(|&x| eval(x).ok()).collect();
    let width = b - a;
    let up_ok: Vec<bool> = states.iter().map(|s| s.is_some_and(|s| s.upper(tol))).collect();
    let lo_ok: Vec<bool> = states.iter().map(|s| s.is_some_and(|s| s.lower(tol))).collect();
    let t_up = region(&pts, &up_ok, side, width, |x| eval(x).is_ok_and(|s| s.upper(tol)));
    let t_lo = region(&pts, &lo_ok, side, width, |x| eval(x).is_ok_and(|s| s.lower(tol)));

    // Larger verified region wins; equal regions mean both conditions hold.
    let better = |t: f64, u: f64| match side {
        TailSide::Right => t < u,
        TailSide::Left => t > u,
    };
    let (verdict, threshold) = match (t_up, t_lo) {
        (Some(u), Some(l)) if u == l => (Verdict::Exact, u),
        (Some(u), Some(l)) => {
            if better(u, l) {
                (Verdict::Upper, u)
            } else {
                (Verdict::Lower, l)
            }
        }
        (Some(u), None) => (Verdict::Upper, u),
        (None, Some(l)) => (Verdict::Lower, l),
        (None, None) => (Verdict::Invalid, f64::NAN),
    };

    let in_region = |x: f64| match side {
        TailSide::Right => x >= threshold,
        TailSide::Left => x <= threshold,
    };
    let tightness_ok = match verdict {
        Verdict::Upper | Verdict::Lower => {
            let mut checked = false;
            let mut all = true;
            for (x, s) in pts.iter().zip(&states) {
                if let Some(PointState { rho, rho_prev: Some(prev), .. }) = s {
                    if in_region(*x) {
                        checked = true;
                        let sum = rho + prev;
                        all &= if verdict == Verdict::Lower { sum >= -tol } else { sum <= tol };
                    }
                }
            }
            checked.then_some(all)
        }
        _ => None,
    };

    let residuals = pts
        .iter()
        .zip(&states)
        .map(|(&x, s)| (x, s.map_or(f64::NAN, |s| s.rho)))
        .collect();

    let n = pts.len();
    let (edge, inner) = match side {
        TailSide::Right => (states[n - 1], states[n - 2]),
        TailSide::Left => (states[0], states[1]),
    };
    let limit_ok = match (edge, inner) {
        (Some(e), Some(i)) => e.ln_value <= grid.limit_tol.ln() && e.ln_value < i.ln_value,
        _ => false,
    };

    Ok(Classification {
        verdict,
        threshold,
        upper_threshold: t_up,
        lower_threshold: t_lo,
        tightness_ok,
        residuals,
        limit_ok,
        window,
        tol,
    })
}

/// Condition values of an iterate at x.
pub(crate) fn iterate_state(it: &BoundIterate, x: f64) -> Result<PointState> {
    let c = it.chain(x, 1)?;
    let i = it.index;
    let sign = it.side.sign();
    let q = c.q[i].value();
    let (gv, gd) = if i == 0 { c.seed_generator } else { (c.q[i - 1].value(), c.slope(i - 1)) };
    let rho = sign * c.slope(i) - 1.0;
    let valid = q > 0.0 && gv > 0.0 && sign * gd > 0.0 && rho.is_finite();
    let rho_prev = (i > 0).then(|| sign * c.slope(i - 1) - 1.0);
    let ln_value = if q > 0.0 { c.ln_f.value() + q.ln() } else { f64::NAN };
    Ok(PointState { valid, rho, rho_prev, ln_value })
}

pub(crate) fn check_window(it: &BoundIterate, window: (f64, f64)) -> Result<()> {
    let s = &it.dist.support;
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::WindowTooSmall(format!("degenerate window [{a}, {b}]")));
    }
    if !(s.interior(a) && s.interior(b)) {
        return Err(Error::WindowTooSmall(format!("window [{a}, {b}] is not inside the support of {}", it.dist.name)));
    }
    Ok(())
}

/// Upper / Lower / Exact / Invalid verdict for an iterate on a window.
pub fn classify(it: &BoundIterate, window: (f64, f64), grid: &GridSpec, tol: f64) -> Result<Classification> {
    check_window(it, window)?;
    classify_points(|x| iterate_state(it, x), it.side, window, grid, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_exponential, make_gaussian};
    use crate::engine::{make_seed, SeedKind};

    fn gaussian_iterates(n: usize) -> Vec<BoundIterate> {
        let mut v = vec![make_seed(make_gaussian(0.0, 1.0).unwrap(), SeedKind::PdfSeed, TailSide::Right).unwrap()];
        for _ in 0..n {
            let next = v.last().unwrap().iterate().unwrap();
            v.push(next);
        }
        v
    }

    #[test]
    fn gaussian_verdicts_and_thresholds() {
        let its = gaussian_iterates(2);
        let g = GridSpec::uniform(512);
        let c0 = classify(&its[0], (-3.0, 20.0), &g, DEFAULT_TOL).unwrap();
        assert_eq!(c0.verdict, Verdict::Upper);
        assert!(c0.threshold.abs() < 1e-6);
        let c1 = classify(&its[1], (-3.0, 20.0), &g, DEFAULT_TOL).unwrap();
        assert_eq!(c1.verdict, Verdict::Lower);
        assert!(c1.threshold.abs() < 1e-6);
        assert_eq!(c1.tightness_ok, Some(true));
        let c2 = classify(&its[2], (-3.0, 20.0), &g, DEFAULT_TOL).unwrap();
        assert_eq!(c2.verdict, Verdict::Upper);
        assert!((c2.threshold - (2f64.sqrt() - 1.0).sqrt()).abs() < 1e-6, "{}", c2.threshold);
        assert!(c2.limit_ok);
    }

    #[test]
    fn exponential_is_exact() {
        let it = make_seed(make_exponential(1.0).unwrap(), SeedKind::PdfSeed, TailSide::Right).unwrap();
        let c = classify(&it, (0.5, 30.0), &GridSpec::default(), DEFAULT_TOL).unwrap();
        assert_eq!(c.verdict, Verdict::Exact);
        assert_eq!(c.threshold, 0.5);
    }

    #[test]
    fn window_errors() {
        let it = make_seed(make_exponential(1.0).unwrap(), SeedKind::PdfSeed, TailSide::Right).unwrap();
        assert!(matches!(classify(&it, (2.0, 1.0), &GridSpec::default(), DEFAULT_TOL), Err(Error::WindowTooSmall(_))));
        assert!(matches!(classify(&it, (-1.0, 1.0), &GridSpec::default(), DEFAULT_TOL), Err(Error::WindowTooSmall(_))));
        assert!(classify(&it, (1.0, 2.0), &GridSpec::uniform(10), DEFAULT_TOL).is_err());
    }

    #[test]
    fn grid_shapes() {
        let g = grid_points(1.0, 100.0, &GridSpec::geometric(64)).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g[1] / g[0] - g[63] / g[62]).abs() < 1e-12);
        let u = grid_points(-1.0, 1.0, &GridSpec::geometric(64)).unwrap();
        assert!((u[1] - u[0] - (u[63] - u[62])).abs() < 1e-12);
    }
}
