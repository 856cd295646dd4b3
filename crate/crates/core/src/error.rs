use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("point outside model: {0}")]
    PointOutsideModel(String),
    #[error("vector lies outside the span of the model")]
    OutsideSpan,
    #[error("base point is on the boundary (boundariness {0:.3e})")]
    BoundaryBasePoint(f64),
    #[error("affine map is singular")]
    SingularMap,
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("model has no recorded symmetry group")]
    NoSymmetryRecorded,
    #[error("recorded symmetry group is not transitive on vertices")]
    NotTransitive,
    #[error("unknown model: {0}")]
    UnknownModel(String),
    #[error("conjugate state {index} is degenerate (p - p_i = {gap:.3e})")]
    DegenerateConjugate { index: usize, gap: f64 },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
}
