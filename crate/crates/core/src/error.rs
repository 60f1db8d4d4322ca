use thiserror::Error;

use crate::circle::CirclePoint;
use crate::leaves::Leaf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("malformed angle literal `{0}`")]
    MalformedAngle(String),
    #[error("digit {digit} is not valid in base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
    #[error("d-nary strings need d <= 10 (got {0}); use p/q syntax instead")]
    BaseTooLarge(u32),
    #[error("a leaf needs two distinct endpoints, got {0} twice")]
    DegenerateLeaf(CirclePoint),
    #[error("polygon needs at least 3 distinct vertices")]
    DegeneratePolygon,
    #[error("leaf {0} is critical; its siblings are undefined")]
    CriticalLeaf(Leaf),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("seed leaf {0} is not in the lamination")]
    SeedNotInLamination(Leaf),
    #[error("leaves {0} and {1} cross")]
    Crossing(Leaf, Leaf),
    #[error("fixed point portrait is invalid: {0}")]
    InvalidPortrait(String),
    #[error("critical portrait is invalid: {0}")]
    InvalidCriticalPortrait(String),
    #[error("critical chord {chord} crosses leaf {leaf} of the initial data")]
    Incompatible { chord: Leaf, leaf: Leaf },
    #[error("initial data is not forward invariant: image of {0} is missing")]
    NotForwardInvariant(Leaf),
    #[error("no invariant face found in the sector")]
    NoInvariantFace,
    #[error("set is not invariant under the map")]
    NotInvariant,
    #[error("not rotational: {0}")]
    NotRotational(String),
    #[error("major is ambiguous: {0} and {1} tie")]
    MajorTie(Leaf, Leaf),
    #[error("expected {expected} co-roots, found {found}")]
    CoRootCount { expected: usize, found: usize },
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("polygon lacks adjacent majors: {0}")]
    NoAdjacentMajors(String),
    #[error("{0}")]
    Other(String),
}
