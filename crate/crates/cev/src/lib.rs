//! European option prices, Greeks and the risk-neutral terminal density under
//! the constant-elasticity-of-variance (CEV) diffusion
//! `dS = mu S dt + delta S^(beta/2) dW`, `0 < beta < 2`.
//!
//! The pricing formulas rest on the complementary non-central chi-squared
//! distribution; [`specfun`] houses that kernel, [`model`] the variable
//! transforms, [`pricing`]/[`greeks`]/[`density`] the closed forms,
//! [`asymptotics`] a convergence harness for the five limiting regimes, and
//! [`oracle`] the independent numerical references (Monte Carlo, finite
//! differences, brute-force series, quadrature, Black-Scholes).
//!
//! The numeric core is generic over the scalar type via [`real::Real`];
//! `f64` aliases are re-exported at the crate root.

pub mod asymptotics;
pub mod cli;
pub mod density;
pub mod error;
pub mod greeks;
pub mod model;
pub mod oracle;
pub mod pricing;
pub mod real;
pub mod specfun;

pub use error::{CevError, Result};
pub use pricing::OptionKind;
pub use real::Real;

/// `f64` market/contract parameters.
pub type CevParams = model::CevParams<f64>;
/// `f64` transformed variables.
pub type TransformedVars = model::TransformedVars<f64>;
/// `f64` Greeks report.
pub type GreeksReport = greeks::GreeksReport<f64>;
/// `f64` chi-squared query.
pub type NcChi2Query = specfun::NcChi2Query<f64>;

/// `f32` variants of the same types.
pub type CevParams32 = model::CevParams<f32>;
pub type TransformedVars32 = model::TransformedVars<f32>;
pub type GreeksReport32 = greeks::GreeksReport<f32>;
pub type NcChi2Query32 = specfun::NcChi2Query<f32>;
