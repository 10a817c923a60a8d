//! Error type shared by all core modules.

use core::fmt;

/// Errors reported by the core computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter violates its validity constraint.
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    /// An argument lies outside the domain of the requested evaluation.
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// A bracketed root search failed to converge.
    RootSearchFailed { lo: f64, hi: f64, residual: f64 },
    /// A linear system was too ill-conditioned to solve reliably.
    SingularSystem {
        what: &'static str,
        conditioning: f64,
    },
    /// The contact impulse iteration did not converge even after the
    /// configured number of step halvings.
    ImpulseSolveFailed {
        time: f64,
        iterations: usize,
        residual: f64,
    },
    /// A contact point would lie inside the clamped region of the beam.
    ClampOverlap { position: f64 },
    /// The slider rotation left the range where the kinematics are meaningful.
    RotationOutOfRange { beta: f64 },
    /// An operation over a grid received an empty grid.
    EmptyGrid,
    /// A grid or time series is not strictly increasing.
    NotMonotone { name: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter {
                name,
                value,
                constraint,
            } => write!(f, "invalid parameter {name} = {value:e}: must satisfy {constraint}"),
            Error::OutOfDomain {
                name,
                value,
                lo,
                hi,
            } => write!(f, "{name} = {value:e} outside domain [{lo:e}, {hi:e}]"),
            Error::RootSearchFailed { lo, hi, residual } => write!(
                f,
                "root search on bracket [{lo:e}, {hi:e}] did not converge (residual {residual:e})"
            ),
            Error::SingularSystem { what, conditioning } => {
                write!(f, "singular system in {what} (conditioning {conditioning:e})")
            }
            Error::ImpulseSolveFailed {
                time,
                iterations,
                residual,
            } => write!(
                f,
                "contact impulse iteration failed at t = {time:e} s after {iterations} sweeps \
                 (last impulse change {residual:e} N s); step halving exhausted"
            ),
            Error::ClampOverlap { position } => write!(
                f,
                "slider contact at normalized position {position} overlaps the clamped region"
            ),
            Error::RotationOutOfRange { beta } => write!(
                f,
                "slider rotation beta = {beta} rad left the physically meaningful range (|beta| < pi/4)"
            ),
            Error::EmptyGrid => write!(f, "empty grid"),
            Error::NotMonotone { name } => write!(f, "{name} must be strictly increasing"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
