//! Numerical toolkit for a dual risk model in which capital decreases at unit
//! rate and jumps at gain epochs from `u` to `(1 + a) u + C`.
//!
//! The crate covers:
//!
//! * [`model`]: parameter types, interarrival laws and drift classification.
//! * [`transforms`]: the Laplace transform of the ruin probability, the double
//!   transform of the ruin time and the mixture-jump generalisation.
//! * [`inversion`]: Euler-summation and fixed-Talbot Laplace inversion.
//! * [`lattice`]: exit transforms and barrier dividends on the geometric level
//!   lattice `L_n = b / (1 + a)^n` for pure proportional gains.
//! * [`brownian`]: the same lattice problems with a Brownian perturbation.
//! * [`mc`]: an independent Monte-Carlo oracle for every analytic target.
//!
//! ```
//! use dualgain::model::{DualModelParams, InterarrivalSpec};
//! use dualgain::transforms::{RuinTransform, SeriesControl};
//! use dualgain::inversion::{ruin_probability, InversionControl};
//!
//! let params = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
//! let rt = RuinTransform::new(params, SeriesControl::default()).unwrap();
//! let r = ruin_probability(1.0, &rt, &InversionControl::default()).unwrap();
//! assert!(r.value > 0.0 && r.value < 1.0);
//! ```

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod grid;
pub mod inversion;
pub mod lattice;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod quadrature;
pub mod transforms;

pub use num_complex::Complex64;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("LST pole: Re(s) = {re} is outside the analytic domain Re(s) > {bound}")]
    LstPole { re: f64, bound: f64 },
    #[error("pole hit at s = {0}")]
    Pole(Complex64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),
    #[error("singular linear system (condition number {cond:e})")]
    Singular { cond: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("the law has no density: {0}")]
    NoDensity(String),
    #[error("root search failed: {0}")]
    Root(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
