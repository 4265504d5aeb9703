use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight at point {index} is {value}; weights must be finite and strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("weighted space must contain at least one point")]
    EmptySpace,

    #[error("fiber dimension must be at least 1")]
    ZeroFiber,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operands live on different weighted spaces")]
    SpaceMismatch,

    #[error("operator is not self-adjoint in the weighted metric (defect {defect:e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("spectral decomposition failed to reconstruct the operator (relative error {0:e})")]
    SpectralReconstruction(f64),

    #[error("time parameter must be finite and nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("parameter `{name}` is invalid: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator has min eigenvalue {min} below the required lower bound {bound}")]
    NotBoundedBelow { min: f64, bound: f64 },

    #[error("potential is not symmetric at point {point} (defect {defect:e})")]
    AsymmetricPotential { point: usize, defect: f64 },

    #[error("potential is not positive semidefinite at point {point} (min eigenvalue {min})")]
    IndefinitePotential { point: usize, min: f64 },

    #[error("semigroup domination was not verified for this pair")]
    DominationNotVerified,

    #[error("mesh not closed: edge ({0}, {1}) has {2} incident face(s)")]
    MeshNotClosed(usize, usize, usize),

    #[error("mesh not orientable: adjacent faces disagree on edge ({0}, {1})")]
    MeshNotOrientable(usize, usize),

    #[error("degenerate triangle {face}: {reason}")]
    DegenerateFace { face: usize, reason: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("analytic curvature requested but the mesh carries no parametrization")]
    MissingParametrization,

    #[error("b1 oracles disagree: hodge kernel {hodge}, boundary rank {homology}")]
    OracleDisagreement { hodge: usize, homology: usize },

    #[error("curvature lower bound violated: K = {value} at vertex {vertex} is below -{bound}")]
    CurvatureBoundViolated { vertex: usize, value: f64, bound: f64 },

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("linear algebra routine failed to converge: {0}")]
    NoConvergence(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
