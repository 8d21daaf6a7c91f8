use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed mesh: {0}")]
    MalformedMesh(String),

    #[error("duplicate vertices {0} and {1}")]
    DuplicateVertex(usize, usize),

    #[error("inconsistent orientation: {0}")]
    InconsistentOrientation(String),

    #[error("hanging vertex {vertex} lies inside edge ({a}, {b})")]
    HangingVertex { vertex: usize, a: usize, b: usize },

    #[error("degenerate element {0}")]
    DegenerateElement(usize),

    #[error("edge ({0}, {1}) is shared by more than two elements")]
    NonManifoldEdge(usize, usize),

    #[error("point ({u}, {v}) lies outside the reference element")]
    OutsideReference { u: f64, v: f64 },

    #[error("singular Jacobian (det = {0:e})")]
    SingularJacobian(f64),

    #[error("degree must be >= 5 (got {0})")]
    DegreeTooLow(usize),

    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),

    #[error("zero-length edge {0}")]
    ZeroLengthEdge(usize),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("interior interpolation system of element {element} is ill-conditioned (cond = {cond:e})")]
    IllConditioned { element: usize, cond: f64 },

    #[error("matrix is not positive definite (pivot {index} = {value:e})")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature with {points} points per direction is too weak for degree {degree}")]
    QuadratureTooWeak { points: usize, degree: usize },

    #[error("spline/mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
