//! Candidate tail functions h(x) checked directly against
//! h′ + f ≤ 0 (right) or h′ − f ≥ 0 (left), and the Markov and Chernoff
//! instances.

use std::fmt;
use std::sync::Arc;

use crate::dist::DistributionSpec;
use crate::engine::{classify_points, Classification, GridSpec, JetFn, PointState, TailSide};
use crate::error::{param, Error, Result};
use crate::jet::Jet;
use crate::oracle::oracle_ln_tail;

/// Moment generating function t ↦ M(t).
pub type MgfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CandidateH {
    /// (anchor, order ≤ 1) → jet of h.
    pub evaluator: JetFn,
    pub side: TailSide,
    pub description: String,
}

impl fmt::Debug for CandidateH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CandidateH").field("side", &self.side).field("description", &self.description).finish()
    }
}

impl CandidateH {
    pub fn value(&self, x: f64) -> Result<f64> {
        Ok((self.evaluator)(x, 0)?.value())
    }
}

fn h_state(dist: &DistributionSpec, h: &CandidateH, x: f64) -> Result<PointState> {
    let j = (h.evaluator)(x, 1)?;
    let (hv, hd) = (j.value(), j.coeff(1));
    let ln_f = dist.log_pdf(x)?;
    let rho = h.side.sign() * hd * (-ln_f).exp() - 1.0;
    Ok(PointState {
        valid: hv > 0.0 && rho.is_finite(),
        rho,
        rho_prev: None,
        ln_value: if hv > 0.0 { hv.ln() } else { f64::NAN },
    })
}

/// Upper when h′ + f ≤ 0 (right) or h′ − f ≥ 0 (left) on the verified window.
///
/// The condition is tested relative to f, as σh′/f − 1 against `tol`.
pub fn classify_h(dist: &DistributionSpec, h: &CandidateH, window: (f64, f64), grid: &GridSpec, tol: f64) -> Result<Classification> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::WindowTooSmall(format!("degenerate window [{a}, {b}]")));
    }
    if !(dist.support.interior(a) && dist.support.interior(b)) {
        return Err(Error::WindowTooSmall(format!("window [{a}, {b}] is not inside the support of {}", dist.name)));
    }
    classify_points(|x| h_state(dist, h, x), h.side, window, grid, tol)
}

/// h = E/x, or E/x − E/r for a finite right end r.
pub fn markov_h(mean: f64, r: f64) -> Result<CandidateH> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(param(format!("markov h needs a finite positive mean, got {mean}")));
    }
    if !(r > 0.0) {
        return Err(param(format!("markov h needs r > 0, got {r}")));
    }
    let shift = if r.is_finite() { mean / r } else { 0.0 };
    let evaluator: JetFn = Arc::new(move |x, order| {
        let j = Jet::variable(x, order.min(1)).recip()?.scale(mean);
        Ok(j.add_scalar(-shift))
    });
    let description = if r.is_finite() { format!("markov E/x - E/r, E = {mean}, r = {r}") } else { format!("markov E/x, E = {mean}") };
    Ok(CandidateH { evaluator, side: TailSide::Right, description })
}

struct Chernoff {
    mgf: MgfFn,
    ts: Vec<f64>,
    ln_m: Vec<f64>,
    r: f64,
}

impl Chernoff {
    fn objective(&self, t: f64, ln_m: f64, x: f64) -> f64 {
        let mut v = ln_m - t * x;
        if self.r.is_finite() {
            v += (-(-t * (self.r - x)).exp_m1()).ln();
        }
        v
    }

    /// Minimizer t* and ln h(x).
    fn minimize(&self, x: f64) -> (f64, f64) {
        let mut best = 0;
        let mut best_v = f64::INFINITY;
        for (i, (&t, &lm)) in self.ts.iter().zip(&self.ln_m).enumerate() {
            let v = self.objective(t, lm, x);
            if v < best_v {
                best = i;
                best_v = v;
            }
        }
        let (mut t_best, n) = (self.ts[best], self.ts.len());
        if n < 2 {
            return (t_best, best_v);
        }
        let mut a = self.ts[best.saturating_sub(1)];
        let mut b = self.ts[(best + 1).min(n - 1)];
        let f = |t: f64| {
            let m = (self.mgf)(t);
            if m > 0.0 && m.is_finite() {
                self.objective(t, m.ln(), x)
            } else {
                f64::INFINITY
            }
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if b - a <= 1e-13 * (1.0 + b.abs()) {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let (t, v) = if fc <= fd { (c, fc) } else { (d, fd) };
        if v < best_v {
            t_best = t;
            best_v = v;
        }
        (t_best, best_v)
    }
}

/// h(x) = min over t of M(t) e^{−tx} (times 1 − e^{−t(r−x)} for finite r).
///
/// The minimum is scanned on `t_grid` and refined by golden section
/// between the neighbours of the best grid point. h′ is the envelope
/// derivative −t* M(t*) e^{−t*x}.
pub fn chernoff_h(mgf: MgfFn, t_grid: &[f64], r: f64) -> Result<CandidateH> {
    if t_grid.is_empty() {
        return Err(param("chernoff h needs a nonempty t grid"));
    }
    let mut ts = t_grid.to_vec();
    if let Some(&t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(param(format!("chernoff t grid must be positive, got {t}")));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut ln_m = Vec::with_capacity(ts.len());
    for &t in &ts {
        let m = mgf(t);
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::MgfDiverged(t));
        }
        ln_m.push(m.ln());
    }
    let description = format!("chernoff over {} t values in [{}, {}]", ts.len(), ts[0], ts[ts.len() - 1]);
    let ch = Arc::new(Chernoff { mgf, ts, ln_m, r });
    let evaluator: JetFn = Arc::new(move |x, order| {
        if !(x < ch.r) {
            return Err(crate::error::domain(format!("chernoff h needs x < r = {}", ch.r)));
        }
        let (t, ln_h) = ch.minimize(x);
        let h = ln_h.exp();
        let mut coeffs = vec![h];
        if order >= 1 {
            coeffs.push(-t * ((ch.mgf)(t).ln() - t * x).exp());
        }
        Ok(Jet::from_coeffs(x, coeffs))
    });
    Ok(CandidateH { evaluator, side: TailSide::Right, description })
}

/// h equal to the reference tail itself: 1 − F (right) or F (left).
pub fn tail_h(dist: Arc<DistributionSpec>, side: TailSide) -> CandidateH {
    let description = format!("reference tail of {}", dist.name);
    let evaluator: JetFn = Arc::new(move |x, order| {
        let v = oracle_ln_tail(&dist, x, side)?.exp();
        let mut coeffs = vec![v];
        if order >= 1 {
            coeffs.push(side.sign() * dist.pdf(x));
        }
        Ok(Jet::from_coeffs(x, coeffs))
    });
    CandidateH { evaluator, side, description }
}
