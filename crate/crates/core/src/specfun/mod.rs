//! Special functions and quadrature used by the transform engine.

mod chebyshev;
mod faddeeva;
mod gamma;
mod quadrature;
mod tanh_sinh;

pub use chebyshev::ChebyshevTable;
pub use faddeeva::{erfc_complex, erfc_scaled, faddeeva_w};
pub use gamma::{gamma_fn, gamma_ratio, ln_gamma, upper_gamma_regularized};
pub use quadrature::{
    gauss_kronrod_21, integrate_adaptive, integrate_adaptive_real, integrate_adaptive_with_tail,
    Interval, QuadratureOptions, QuadratureResult,
};
pub use tanh_sinh::integrate_tanh_sinh;
