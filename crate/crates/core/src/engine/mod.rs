//! Seeds, iterates, classification, the iterative algorithms and
//! convergence rates.
//!
//! Every iterate is carried as P_i = f · q_i. The factor q_i is built from
//! jets of ln f, so P_i is never formed directly and far tails do not
//! underflow. With L = (ln f)′ and σ = −1 (right tail) or +1 (left tail):
//!
//! q_{i+1} = σ q_i / (L q_i + q_i′).

mod algorithm;
mod classify;
mod rate;

use std::fmt;
use std::sync::Arc;

pub use algorithm::{run_algorithm, AlgorithmResult, AlgorithmStep, StopReason};
pub use classify::{
    classify, classify_points, grid_points, Classification, GridSpec, PointState, Spacing, Verdict,
    DEFAULT_LIMIT_TOL, DEFAULT_TOL,
};
pub use rate::{convergence_rate, convergence_rate_pair, convergence_rate_ratio};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailSide {
    Right,
    Left,
}

impl TailSide {
    /// −1 for the right tail, +1 for the left tail.
    pub fn sign(self) -> f64 {
        match self {
            TailSide::Right => -1.0,
            TailSide::Left => 1.0,
        }
    }
}

/// Jet evaluator (anchor, order) → jet.
pub type JetFn = Arc<dyn Fn(f64, usize) -> Result<Jet> + Send + Sync>;

#[derive(Clone)]
pub enum SeedKind {
    /// g = f
    PdfSeed,
    /// g = (x − l) f
    ShiftedPdfSeed,
    /// P₀ = h for a user-supplied h
    DirectH(JetFn),
    /// P₀ = ∓ f g/g′ for a user-supplied g
    CustomG(JetFn),
}

impl SeedKind {
    pub fn label(&self) -> &'static str {
        match self {
            SeedKind::PdfSeed => "pdf",
            SeedKind::ShiftedPdfSeed => "shifted-pdf",
            SeedKind::DirectH(_) => "direct-h",
            SeedKind::CustomG(_) => "custom-g",
        }
    }
}

impl fmt::Debug for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One member P_i of the iterative sequence.
#[derive(Clone, Debug)]
pub struct BoundIterate {
    pub index: usize,
    pub side: TailSide,
    pub dist: Arc<DistributionSpec>,
    pub seed: SeedKind,
}

/// Jets of ln f, L and the factors q_0..=q_i at one anchor.
#[derive(Clone, Debug)]
pub struct FactorChain {
    pub ln_f: Jet,
    pub dln_f: Jet,
    /// q_j has order `order + index − j`.
    pub q: Vec<Jet>,
    /// Generator of the seed divided by f, with its derivative: (g/f, g′/f).
    pub seed_generator: (f64, f64),
}

impl FactorChain {
    /// P_j′/f at the anchor.
    pub fn slope(&self, j: usize) -> f64 {
        let q = &self.q[j];
        self.dln_f.value() * q.value() + q.coeff(1)
    }
}

pub fn make_seed(dist: impl Into<Arc<DistributionSpec>>, seed: SeedKind, side: TailSide) -> Result<BoundIterate> {
    let dist = dist.into();
    if let SeedKind::ShiftedPdfSeed = seed {
        if !dist.support.lower.is_finite() {
            return Err(Error::SeedIncompatible(format!(
                "shifted-pdf seed needs a finite lower support end, {} has l = −∞",
                dist.name
            )));
        }
    }
    Ok(BoundIterate { index: 0, side, dist, seed })
}

fn pole(x: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::DivisionByZeroJet { .. } => Error::PoleEncountered(x),
        other => other,
    }
}

impl BoundIterate {
    /// The next iterate ∓ f P_i / P_i′.
    pub fn iterate(&self) -> Result<BoundIterate> {
        if self.index + 3 > MAX_ORDER {
            return Err(Error::OrderTooLarge(self.index + 3));
        }
        Ok(BoundIterate { index: self.index + 1, ..self.clone() })
    }

    /// Factor jets q_0..=q_i with q_i carried to `order`.
    pub fn chain(&self, x: f64, order: usize) -> Result<FactorChain> {
        let m = order + self.index;
        if m + 1 > MAX_ORDER {
            return Err(Error::OrderTooLarge(m + 1));
        }
        let sign = self.side.sign();
        let ln_f = self.dist.log_pdf_jet(x, m + 1)?;
        let dln_f = ln_f.shift_derivative()?;
        let ln_f = ln_f.truncate(m);
        let l0 = dln_f.value();
        let (q0, gen) = match &self.seed {
            SeedKind::PdfSeed => (dln_f.recip().map_err(pole(x))?.scale(sign), (1.0, l0)),
            SeedKind::ShiftedPdfSeed => {
                let lower = self.dist.support.lower;
                let shift = Jet::variable(x, m) - lower;
                let dlg = shift.recip().map_err(pole(x))? + &dln_f;
                let d = x - lower;
                (dlg.recip().map_err(pole(x))?.scale(sign), (d, 1.0 + d * l0))
            }
            SeedKind::CustomG(g) => {
                let gj = g(x, m + 1)?;
                let dg = gj.shift_derivative()?;
                let q = gj.truncate(m).div(&dg).map_err(pole(x))?.scale(sign);
                let inv_f = (-ln_f.value()).exp();
                (q, (gj.value() * inv_f, dg.value() * inv_f))
            }
            SeedKind::DirectH(h) => {
                let hj = h(x, m)?;
                let q = &hj * &(-&ln_f).exp();
                let q0v = q.value();
                (q, (1.0, sign / q0v))
            }
        };
        let mut q = Vec::with_capacity(self.index + 1);
        q.push(q0);
        for j in 0..self.index {
            let prev = &q[j];
            let dprev = prev.shift_derivative()?;
            let s = &(&dln_f.truncate(dprev.order()) * &prev.truncate(dprev.order())) + &dprev;
            let next = prev.truncate(dprev.order()).div(&s).map_err(pole(x))?.scale(sign);
            q.push(next);
        }
        Ok(FactorChain { ln_f, dln_f, q, seed_generator: gen })
    }

    /// Jet of the factor q_i = P_i / f.
    pub fn factor_jet(&self, x: f64, order: usize) -> Result<Jet> {
        let mut c = self.chain(x, order)?;
        Ok(c.q.pop().expect("chain is never empty"))
    }

    /// Jet of P_i itself; may underflow where f does.
    pub fn jet(&self, x: f64, order: usize) -> Result<Jet> {
        let mut c = self.chain(x, order)?;
        let q = c.q.pop().expect("chain is never empty");
        Ok(&c.ln_f.truncate(order).exp() * &q)
    }

    /// ln P_i(x); an error when P_i(x) ≤ 0.
    pub fn ln_value(&self, x: f64) -> Result<f64> {
        let c = self.chain(x, 0)?;
        let q = c.q[self.index].value();
        if !(q > 0.0) {
            return Err(Error::OutOfValidity(format!("P{} is not positive at x = {x}", self.index)));
        }
        Ok(c.ln_f.value() + q.ln())
    }

    /// P_i(x), possibly non-positive outside the validity region.
    pub fn value(&self, x: f64) -> Result<f64> {
        let c = self.chain(x, 0)?;
        Ok(c.ln_f.value().exp() * c.q[self.index].value())
    }
}
