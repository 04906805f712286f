//! Crate-wide error type.
//!
//! Every fallible constructor and routine in this crate returns
//! [`Error`]; variants carry enough context to report the offending
//! parameter without the caller re-deriving it.

use thiserror::Error;

/// Errors produced by grid construction, field operations, the solver,
/// and the diagnostics routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid parameters outside the supported envelope.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Potential parameters outside the supported envelope.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// A field has the wrong number of cells for the grid it is paired with.
    #[error("field length {found} does not match grid with {expected} cells")]
    FieldShape { expected: usize, found: usize },

    /// A routine was asked for something outside its documented scope.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid parameter for a diagnostics or fitting routine.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An initial profile clipped by the domain boundary beyond tolerance.
    #[error("profile not resolved on domain: clipped mass fraction {clipped:.3e} exceeds {tol:.1e}")]
    ProfileClipped { clipped: f64, tol: f64 },

    /// The solver could not keep the density nonnegative within its retry budget.
    #[error("positivity retries exhausted at tau={tau:.6} (dt={dt:.3e} after {retries} halvings)")]
    PositivityRetriesExhausted { tau: f64, dt: f64, retries: u32 },

    /// Too much mass reached the domain boundary; the no-flux box is no
    /// longer a faithful truncation of the whole-space problem.
    #[error("boundary density {value:.3e} exceeded {limit:.1e} at tau={tau:.6}; enlarge the domain")]
    BoundaryContaminated { tau: f64, value: f64, limit: f64 },

    /// Mass conservation broke beyond the accepted drift budget.
    #[error("mass drift {drift:.3e} exceeded {limit:.1e} at tau={tau:.6}")]
    MassDrift { tau: f64, drift: f64, limit: f64 },

    /// Not enough usable points for a least-squares rate fit.
    #[error("rate fit needs at least {needed} points above the floor, found {found}")]
    TooFewFitPoints { needed: usize, found: usize },

    /// IO error while writing or reading snapshots.
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),

    /// A snapshot file failed validation on read-back.
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
