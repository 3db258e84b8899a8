//! Accelerated over-relaxed ADMM with worst-case linear convergence
//! certification.
//!
//! The crate has three layers:
//!
//! * [`lure`] and [`oracles`] model the algorithm family (step size,
//!   momentum, over-relaxation, dual damping) both as explicit proximal
//!   recursions and as a dimension-free linear system in feedback with the
//!   gradient/subgradient maps.
//! * [`ozf`] and [`certify`] build O'Shea–Zames–Falb multipliers, assemble
//!   the convergence linear matrix inequality and bisect over the rate to
//!   produce a [`certify::RateCertificate`].
//! * [`tune`] and [`lasso`] provide parameter selection heuristics
//!   (Nesterov, Triple Momentum, grid search) and the LASSO benchmark with
//!   a FISTA baseline.

pub mod certify;
pub mod error;
pub mod lasso;
pub mod lure;
pub mod oracles;
pub mod ozf;
pub mod tune;

pub use error::{Error, Result};
pub use lure::{AlgorithmParams, ProblemClass, StateSpacePlant, Trace};
