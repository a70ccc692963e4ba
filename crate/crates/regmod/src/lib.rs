//! regmod — a verification laboratory for the regularity moduli of
//! structured nonsmooth functions.
//!
//! The crate ships a catalog of functions `f = g + h` with exact first-order
//! oracles (values, gradients, subdifferential distances, proximal maps, and
//! enumerated critical sets), estimates the moduli governing first-order
//! methods near a critical point — the exponent-1/2 desingularizer constant,
//! the subregularity modulus of `∂f`, the quadratic-growth modulus, the
//! proximal error-bound modulus, and a uniform prox-regularity certificate —
//! and cross-checks the implications between them, each with its explicit
//! proof constant. A backward-Euler integrator for the convex subgradient
//! flow and a proximal-gradient driver connect the moduli to observed decay
//! and convergence rates.
//!
//! The `regmod` binary exposes the pipeline as subcommands
//! (`catalog`, `crit`, `estimate`, `flow`, `check`, `suite`); see the README
//! for the file formats.

pub mod catalog;
pub mod checks;
pub mod cloud;
pub mod critical;
pub mod error;
pub mod estimators;
pub mod flow;
pub mod instance;
pub mod linalg;
pub mod prox;
pub mod report;
pub mod suite;

pub use error::{Error, Result};
pub use instance::{ExtendedReal, Family, FunctionInstance, NonsmoothPart, SmoothPart};
