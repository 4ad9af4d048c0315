//! Truncated Taylor series ("jets") in one variable.
//!
//! A jet of order N at anchor x stores `c[k] = F^(k)(x) / k!` for k = 0..=N.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{domain, Error, Result};

/// Highest order a jet may carry.
pub const MAX_ORDER: usize = 16;

/// Leading-coefficient magnitude below which division reports a pole.
pub const DIV_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    anchor: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Builds a jet from normalized coefficients.
    ///
    /// # Panics
    /// Panics when `coeffs` is empty or longer than `MAX_ORDER + 1`.
    pub fn from_coeffs(anchor: f64, coeffs: Vec<f64>) -> Jet {
        assert!(
            !coeffs.is_empty() && coeffs.len() <= MAX_ORDER + 1,
            "jet order out of range"
        );
        Jet { anchor, coeffs }
    }

    pub fn constant(c: f64, anchor: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Jet::from_coeffs(anchor, coeffs)
    }

    /// The identity function F(x) = x.
    pub fn variable(anchor: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = anchor;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet::from_coeffs(anchor, coeffs)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficient k, zero past the order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Raw k-th derivative, `k! * c[k]`.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.coeff(k) * fact
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = order.min(self.order());
        Jet { anchor: self.anchor, coeffs: self.coeffs[..=n].to_vec() }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet { anchor: self.anchor, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(self.anchor == other.anchor, "jets anchored at different points");
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect();
        Jet { anchor: self.anchor, coeffs }
    }

    fn cauchy(&self, other: &Jet) -> Jet {
        debug_assert!(self.anchor == other.anchor, "jets anchored at different points");
        let n = self.coeffs.len().min(other.coeffs.len());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect();
        Jet { anchor: self.anchor, coeffs }
    }

    pub fn scale(&self, s: f64) -> Jet {
        self.map(|c| c * s)
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Quotient with the default pole floor.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.div_with_floor(other, DIV_FLOOR)
    }

    pub fn div_with_floor(&self, other: &Jet, floor: f64) -> Result<Jet> {
        debug_assert!(self.anchor == other.anchor, "jets anchored at different points");
        let b = &other.coeffs;
        if !(b[0].abs() >= floor) {
            return Err(Error::DivisionByZeroJet { anchor: self.anchor, value: b[0] });
        }
        let n = self.coeffs.len().min(b.len());
        let mut q = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= b[j] * q[k - j];
            }
            q.push(acc / b[0]);
        }
        Ok(Jet { anchor: self.anchor, coeffs: q })
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(1.0, self.anchor, self.order()).div(self)
    }

    pub fn exp(&self) -> Jet {
        let a = &self.coeffs;
        let mut e = Vec::with_capacity(a.len());
        e.push(a[0].exp());
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
            e.push(s / k as f64);
        }
        Jet { anchor: self.anchor, coeffs: e }
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = &self.coeffs;
        if !(a[0] > 0.0) {
            return Err(domain(format!("ln of non-positive value {} at x = {}", a[0], self.anchor)));
        }
        let mut l = Vec::with_capacity(a.len());
        l.push(a[0].ln());
        for k in 1..a.len() {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l.push((a[k] - s / k as f64) / a[0]);
        }
        Ok(Jet { anchor: self.anchor, coeffs: l })
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a = &self.coeffs;
        if !(a[0] > 0.0) {
            return Err(domain(format!("sqrt of non-positive value {} at x = {}", a[0], self.anchor)));
        }
        let mut s = Vec::with_capacity(a.len());
        s.push(a[0].sqrt());
        for k in 1..a.len() {
            let cross: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s.push((a[k] - cross) / (2.0 * s[0]));
        }
        Ok(Jet { anchor: self.anchor, coeffs: s })
    }

    /// Real power `a^p`; requires a positive leading coefficient.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let a = &self.coeffs;
        if !(a[0] > 0.0) {
            return Err(domain(format!("pow of non-positive value {} at x = {}", a[0], self.anchor)));
        }
        let mut y = Vec::with_capacity(a.len());
        y.push(a[0].powf(p));
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| ((p + 1.0) * j as f64 - k as f64) * a[j] * y[k - j]).sum();
            y.push(s / (k as f64 * a[0]));
        }
        Ok(Jet { anchor: self.anchor, coeffs: y })
    }

    /// Jet of F′, one order lower.
    pub fn shift_derivative(&self) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::OrderExhausted);
        }
        let coeffs = (0..self.order()).map(|k| (k + 1) as f64 * self.coeffs[k + 1]).collect();
        Ok(Jet { anchor: self.anchor, coeffs })
    }

    /// Antiderivative with value `c0` at the anchor, one order higher.
    pub fn integrate(&self, c0: f64) -> Result<Jet> {
        if self.order() >= MAX_ORDER {
            return Err(Error::OrderTooLarge(self.order() + 1));
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0);
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Ok(Jet { anchor: self.anchor, coeffs })
    }
}

/// Solves the autonomous-in-jets system y′ = rhs(y) as Taylor series at `anchor`.
///
/// `rhs` receives the state jets at some order k and must return derivative
/// jets of at least order k. Coefficient k+1 of each state comes from
/// coefficient k of its derivative.
pub fn solve_ode<F>(anchor: f64, order: usize, init: &[f64], rhs: F) -> Result<Vec<Jet>>
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>>,
{
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge(order));
    }
    let mut state: Vec<Vec<f64>> = init.iter().map(|&v| vec![v]).collect();
    for k in 0..order {
        let jets: Vec<Jet> = state.iter().map(|c| Jet::from_coeffs(anchor, c.clone())).collect();
        let d = rhs(&jets)?;
        for (s, dj) in state.iter_mut().zip(d.iter()) {
            s.push(dj.coeff(k) / (k + 1) as f64);
        }
    }
    Ok(state.into_iter().map(|c| Jet::from_coeffs(anchor, c)).collect())
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a: &Jet, b: &Jet| a.cauchy(b));

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_scalar(-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_scalar(-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
