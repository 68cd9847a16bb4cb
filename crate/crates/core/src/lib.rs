//! Synthesis of non-Gaussian correlated sequences with a prescribed marginal
//! law and autocorrelation.
//!
//! The marginal's cumulants are pushed back through an autoregressive filter,
//! the input's log-Laplace transform is continued by a Padé approximant into a
//! product of compound-Poisson factors, and those factors are sampled exactly.

pub mod armodel;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod cumseries;
pub mod dd;
pub mod diagnose;
pub mod dist;
pub mod linalg;
pub mod pade;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod special;
pub mod validate;

pub use scalar::Scalar;

/// Double-double working precision used for the series and Padé stages.
pub type Precise = dd::DoubleDouble;

pub type PadeApproximantF64 = pade::PadeApproximant<f64>;
pub type PadeApproximantPrecise = pade::PadeApproximant<Precise>;
pub type PoleResidueFormF64 = pade::PoleResidueForm<f64>;
pub type PoleResidueFormPrecise = pade::PoleResidueForm<Precise>;
pub type CumulantVectorF64 = cumseries::CumulantVector<f64>;
pub type CumulantVectorPrecise = cumseries::CumulantVector<Precise>;
pub type PowerSeriesF64 = cumseries::PowerSeries<f64>;
pub type PowerSeriesPrecise = cumseries::PowerSeries<Precise>;
