//! Numerical building blocks: normal distribution functions, log-sum-exp,
//! quadrature over a normal variable, and 1-D root finding.

pub mod lse;
pub mod normal;
pub mod quadrature;
pub mod roots;

pub use lse::{log_add_exp, log_sum_exp};
