//! Special functions, distribution kernels and quadrature.

pub mod density;
pub mod quadrature;
pub mod special;

pub use density::{binomial_logpmf, gamma_logpdf, ln_factorial, normal_logpdf, poisson_logpmf};
pub use quadrature::{integrate, Integral};
pub use special::{
    inv_reg_inc_beta, ln_beta, log_gamma, reg_inc_beta, reg_inc_beta_complement, QuantileSolverConfig,
};
