use core::fmt;

/// Errors raised by the numerical routines, the gain scheduler and parameter
/// validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A complex root was passed without its conjugate.
    UnpairedComplexRoot {
        /// Position of the offending root in the input slice.
        index: usize,
    },
    /// Linear solve hit a pivot below the singularity threshold.
    SingularMatrix {
        /// `‖A‖∞ / |smallest pivot|`; infinite for an exactly zero pivot.
        condition_estimate: f64,
    },
    /// Matrix shape outside what the routine supports.
    Dimension {
        /// Rows of the offending operand.
        rows: usize,
        /// Columns of the offending operand.
        cols: usize,
    },
    /// Gain scheduling cannot place poles (zero input gain or zero sampling time).
    DegeneratePlacement(&'static str),
    /// A parameter violates its documented invariant.
    InvalidParameter {
        /// Field name as it appears in configuration.
        field: &'static str,
        /// Human readable constraint.
        reason: &'static str,
    },
    /// A metrics window selected no samples.
    EmptyWindow,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnpairedComplexRoot { index } => {
                write!(f, "complex root at index {index} has no conjugate partner")
            }
            Error::SingularMatrix { condition_estimate } => write!(
                f,
                "matrix is singular to working precision (condition estimate {condition_estimate:e})"
            ),
            Error::Dimension { rows, cols } => {
                write!(f, "unsupported matrix shape {rows}x{cols}")
            }
            Error::DegeneratePlacement(why) => write!(f, "degenerate pole placement: {why}"),
            Error::InvalidParameter { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::EmptyWindow => write!(f, "metrics window contains no samples"),
        }
    }
}

impl core::error::Error for Error {}
