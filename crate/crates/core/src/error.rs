use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
///
/// Messages are static so the type stays `Copy` and allocation free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// A state or speed lies outside the flux's working range.
    Domain { what: &'static str, value: f64 },
    /// A caller-supplied argument violates an operation's precondition.
    Precondition(&'static str),
    /// Invalid construction input (empty samples, non-positive period, ...).
    InvalidInput(&'static str),
    /// Too few usable points for a decay fit.
    InsufficientData { needed: usize, got: usize },
    /// Two independent shock estimators disagree by more than allowed.
    EstimatorDisagreement { mass: f64, transition: f64, limit: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => {
                write!(f, "{what} = {value} lies outside the admissible range")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} usable points, got {got}")
            }
            Error::EstimatorDisagreement {
                mass,
                transition,
                limit,
            } => write!(
                f,
                "shock estimators disagree: mass {mass}, transition {transition} (limit {limit})"
            ),
        }
    }
}

impl core::error::Error for Error {}
