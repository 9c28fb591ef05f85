//! Exact coverage analysis for a single-antenna link assisted by an
//! intelligent reflecting surface (IRS) under Nakagami-m fading.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! engine:
//!
//! * [`model`]: link geometry, fading parameters and the moment formulas of
//!   the cascaded (double Nakagami) channel.
//! * [`specfun`]: gamma functions, the Faddeeva function and the complex
//!   `erfc`, Gauss-Kronrod / tanh-sinh quadrature.
//! * [`mgf`]: moment generating and characteristic functions of the direct
//!   link, the cascaded link and their coherent sum.
//! * [`inversion`]: Gil-Pelaez inversion of a characteristic function.
//! * [`coverage`]: coverage / outage probabilities, channel hardening and the
//!   IRS coverage range.
//! * [`montecarlo`]: a brute-force simulator used as an independent oracle.
//!
//! File formats, sweeps and the command line live in the `irscov` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference constants are kept as published
#![allow(clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coverage;
mod error;
pub mod inversion;
pub mod mgf;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used by every transform in the crate.
pub type ComplexValue = Complex64;
