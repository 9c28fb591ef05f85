//! Piecewise Chebyshev interpolation of a complex function on `[lo, hi]`.
//!
//! Used to tabulate characteristic functions whose direct evaluation needs a
//! quadrature (or a nested quadrature) per point.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const DEGREE: usize = 32;
const MAX_PIECES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevTable {
    lo: f64,
    hi: f64,
    width: f64,
    /// `pieces * DEGREE` coefficients, piece-major.
    coeffs: Vec<Complex64>,
}

impl ChebyshevTable {
    /// Builds uniform pieces on `[lo, hi]`, starting from `initial_pieces`
    /// and doubling until the trailing three coefficients of every piece are
    /// below `tol`.
    pub fn build<F>(mut f: F, lo: f64, hi: f64, initial_pieces: usize, tol: f64) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "chebyshev range",
                value: hi - lo,
                reason: "must be a finite, non-empty interval",
            });
        }
        let nodes: [f64; DEGREE] =
            core::array::from_fn(|k| libm::cos(PI * (k as f64 + 0.5) / DEGREE as f64));
        let mut pieces = initial_pieces.max(1);
        // growing `pieces` restarts the outer loop, abandoning the inner range
        #[allow(clippy::mut_range_bound)]
        'grow: loop {
            if pieces > MAX_PIECES {
                return Err(Error::NonConvergence {
                    partial: Complex64::new(0.0, 0.0),
                    abs_error: f64::INFINITY,
                    evaluations: MAX_PIECES * DEGREE,
                });
            }
            let width = (hi - lo) / pieces as f64;
            let mut coeffs = Vec::with_capacity(pieces * DEGREE);
            for p in 0..pieces {
                let center = lo + (p as f64 + 0.5) * width;
                let mut values = [Complex64::new(0.0, 0.0); DEGREE];
                for (v, x) in values.iter_mut().zip(nodes.iter()) {
                    *v = f(center + 0.5 * width * x)?;
                }
                let start = coeffs.len();
                for j in 0..DEGREE {
                    let mut c = Complex64::new(0.0, 0.0);
                    for (k, v) in values.iter().enumerate() {
                        c += v * libm::cos(PI * j as f64 * (k as f64 + 0.5) / DEGREE as f64);
                    }
                    let scale = if j == 0 { 1.0 } else { 2.0 } / DEGREE as f64;
                    coeffs.push(c * scale);
                }
                let tail = coeffs[start + DEGREE - 3..start + DEGREE]
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                if tail > tol {
                    pieces *= 2;
                    continue 'grow;
                }
            }
            return Ok(Self {
                lo,
                hi,
                width,
                coeffs,
            });
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len() / DEGREE
    }

    /// Evaluates the interpolant; `None` outside `[lo, hi]`.
    pub fn eval(&self, x: f64) -> Option<Complex64> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let pieces = self.pieces();
        let p = (((x - self.lo) / self.width) as usize).min(pieces - 1);
        let center = self.lo + (p as f64 + 0.5) * self.width;
        let t = 2.0 * (x - center) / self.width;
        let c = &self.coeffs[p * DEGREE..(p + 1) * DEGREE];
        // Clenshaw
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for cj in c[1..].iter().rev() {
            let b0 = cj + b1 * (2.0 * t) - b2;
            b2 = b1;
            b1 = b0;
        }
        Some(c[0] + b1 * t - b2)
    }
}
