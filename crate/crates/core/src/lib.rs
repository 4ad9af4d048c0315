//! Iterative upper and lower bounds on tail probabilities of continuous
//! random variables, and converse bounds for the finite-blocklength AWGN
//! channel built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod jet;
pub mod dist;
pub mod engine;
pub mod specfun;
pub mod oracle;
pub mod connections;
pub mod awgn;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use jet::Jet;
