use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    /// A subterm evaluated to 0/0, ∞−∞, 0·∞ or ∞/∞.
    #[error("indeterminate form {form} at z = {z}")]
    Indeterminate { form: &'static str, z: String },

    /// A transcendental primitive was applied to the point at infinity.
    #[error("essential singularity of the expression at z = {z}")]
    Essential { z: String },

    #[error("expression uses the family parameter `k` but no value was supplied")]
    MissingParameter,

    #[error("point {point} lies outside the domain {domain}")]
    OutsideDomain { point: String, domain: String },

    #[error("point lies on the curve (distance {distance:e})")]
    PointOnCurve { distance: f64 },

    #[error("winding sum {value} is not within 0.1 of an integer (curve under-sampled)")]
    NonIntegral { value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("map is not a biholomorphism between the given disks (boundary defect {defect:e})")]
    NotBiholomorphic { defect: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn outside(point: impl std::fmt::Display, domain: impl std::fmt::Display) -> Self {
        Error::OutsideDomain {
            point: point.to_string(),
            domain: domain.to_string(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
