use thiserror::Error;

/// Errors raised by the exponent pipeline.
///
/// Each failure mode has its own variant so callers (and the CLI exit codes)
/// can tell a malformed input apart from a construction that is impossible.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("division by zero")]
    DivisionByZero,

    #[error("empty range: lower bound {lo} exceeds upper bound {hi}")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("{name} = {value} is outside the valid domain {expected}")]
    Domain {
        name: &'static str,
        value: i64,
        expected: String,
    },

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("degenerate segment: both endpoints are the same point")]
    DegenerateSegment,

    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: impl Into<i64>, expected: impl Into<String>) -> Error {
    Error::Domain {
        name,
        value: value.into(),
        expected: expected.into(),
    }
}
