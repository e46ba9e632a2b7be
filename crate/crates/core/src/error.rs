use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow in fixed-width arithmetic")]
    Overflow,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("cone is not pointed")]
    NotPointed,
    #[error("monoid is not sharp")]
    NotSharp,
    #[error("monoid is not saturated")]
    NotSaturated,
    #[error("generator {0} is zero")]
    ZeroGenerator(usize),
    #[error("vector is not an element of the monoid")]
    NotInMonoid,
    #[error("quotient lattice has torsion (invariant factors {0:?})")]
    TorsionInQuotient(Vec<String>),
    #[error("points or group elements belong to different monoids")]
    MonoidMismatch,
    #[error("group element belongs to a different root level or monoid")]
    GroupMismatch,
    #[error("{n} does not divide {m}")]
    NonDivisor { n: u64, m: u64 },
    #[error("root level must be positive")]
    ZeroLevel,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("face index {0} out of range")]
    UnknownFace(usize),
    #[error("parse error: {0}")]
    Parse(String),
}
