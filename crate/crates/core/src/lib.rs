//! Harmonic balance approximations of periodic solutions of scalar
//! 2pi-periodic equations `x' = X(x, t)`, continued-fraction
//! simplification of their coefficients, and a-posteriori certificates of
//! existence, uniqueness and hyperbolicity of a true periodic solution near
//! the approximation.

pub mod certificate;
pub mod deformation;
pub mod error;
pub mod hbm;
pub mod ode;
pub mod pipeline;
pub mod problem;
pub mod problems;
pub mod rationalize;
pub mod shooting;
pub mod trigpoly;

pub use error::Error;
