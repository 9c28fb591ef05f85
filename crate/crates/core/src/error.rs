use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates the invariant of its type.
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// Argument outside the domain of a special function.
    Domain { function: &'static str, value: f64 },
    /// NaN or infinite input reached a public operation.
    NonFinite { function: &'static str },
    /// The result (or an unavoidable intermediate) is not representable.
    Overflow { function: &'static str },
    /// Quadrature did not reach the requested tolerance.
    NonConvergence {
        partial: Complex64,
        abs_error: f64,
        evaluations: usize,
    },
    /// `1 + c s Omega / m` is too close to the branch point of the gamma MGF.
    BranchPoint { distance: f64 },
    /// The characteristic-function tail could not be bounded inside the
    /// panel budget.
    Truncation { omega: f64, tail_bound: f64 },
    /// An inverted CDF left `[-eps, 1 + eps]` before clamping.
    RangeExcursion { value: f64, tolerance: f64 },
    /// The scenario's mode/regime combination is not supported.
    InvalidScenario(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter {
                name,
                value,
                reason,
            } => write!(f, "invalid parameter {name} = {value}: {reason}"),
            Error::Domain { function, value } => {
                write!(f, "{function}: argument {value} outside the domain")
            }
            Error::NonFinite { function } => write!(f, "{function}: non-finite input"),
            Error::Overflow { function } => write!(f, "{function}: result overflows f64"),
            Error::NonConvergence {
                partial,
                abs_error,
                evaluations,
            } => write!(
                f,
                "quadrature did not converge after {evaluations} evaluations \
                 (partial value {partial}, error estimate {abs_error:e})"
            ),
            Error::BranchPoint { distance } => write!(
                f,
                "argument within {distance:e} of the branch point of the gamma MGF"
            ),
            Error::Truncation { omega, tail_bound } => write!(
                f,
                "characteristic-function tail bound {tail_bound:e} at omega = {omega:e} \
                 exceeds the tolerance"
            ),
            Error::RangeExcursion { value, tolerance } => write!(
                f,
                "inverted CDF {value} lies outside [0, 1] by more than {tolerance:e}"
            ),
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
