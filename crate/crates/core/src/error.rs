use thiserror::Error;

/// Errors raised for contract violations. Unreachable poses are not errors;
/// the solvers report them as an empty solution set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IkError {
    #[error("axis is not unit length (|axis| = {0})")]
    NonUnitAxis(f64),

    #[error("rotation matrix is not orthonormal (deviation {0:e})")]
    NonOrthonormal(f64),

    #[error("rotation matrix has negative determinant ({0})")]
    Improper(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("vector is parallel to the measurement axis; signed angle is undefined")]
    DegenerateProjection,

    #[error("screw axes are inconsistent with the arm geometry (FK residual {0:e})")]
    InconsistentAxes(f64),

    #[error("swivel angle undefined for every sampled q7: the wrist point lies on the base z axis")]
    SwivelUndefined,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

pub type Result<T> = std::result::Result<T, IkError>;
