use thiserror::Error;

use crate::quaternion::Quaternion;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inverting a quaternion whose squared norm underflows; in quotient
    /// formulas this means the point sits on the real axis.
    #[error("zero divisor: squared norm {norm_sqr:e} below threshold")]
    ZeroDivisor { norm_sqr: f64 },

    /// The point is (numerically) real, so its imaginary direction is undefined.
    #[error("degenerate slice: imaginary magnitude {r:e} too small for a slice direction")]
    DegenerateSlice { r: f64 },

    /// The point lies too close to the subplane R + kR where the angular chart degenerates.
    #[error("singular subplane: sin(beta) = {sin_beta:e}")]
    SingularSubplane { sin_beta: f64 },

    /// A finite-difference probe left the function's domain.
    #[error("probe {point} leaves the domain of `{function}`")]
    DomainExit { function: String, point: Quaternion },

    #[error("|q| = {norm} is outside the convergence radius {radius}")]
    OutsideRadius { norm: f64, radius: f64 },

    /// Two routes to the same closed form disagree.
    #[error("route mismatch: gap {gap:e} exceeds {allowed:e}")]
    RouteMismatch { gap: f64, allowed: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable tag used in reports for skipped rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDivisor { .. } => "zero_divisor",
            Error::DegenerateSlice { .. } => "degenerate_slice",
            Error::SingularSubplane { .. } => "singular_subplane",
            Error::DomainExit { .. } => "domain_exit",
            Error::OutsideRadius { .. } => "outside_radius",
            Error::RouteMismatch { .. } => "route_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
