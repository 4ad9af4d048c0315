//! Special functions used by the catalog, the oracle and the AWGN module.

pub(crate) mod bessel;
mod beta;
mod erf;
mod gamma;
mod lambert;

pub use bessel::{bessel_i_jet, debye_eta, log_bessel_i_scaled, BesselJets, ScaledBesselPair};
pub use beta::{ln_beta, ln_reg_inc_beta, ln_reg_inc_beta_upper, reg_inc_beta, reg_inc_beta_upper};
pub use erf::{erfc, gaussian_q, gaussian_q_inverse, ln_erfc, ln_gaussian_q};
pub use gamma::{ln_gamma, ln_reg_inc_gamma_p, ln_reg_inc_gamma_q, reg_inc_gamma_p, reg_inc_gamma_q};
pub use lambert::lambert_w0;

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;
pub const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// ln(e^a + e^b) without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 - e^a) for a ≤ 0.
pub fn ln_one_minus_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}
