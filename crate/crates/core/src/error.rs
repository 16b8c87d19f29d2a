use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not self-adjoint: residual {residual:.3e} exceeds {threshold:.3e}")]
    NotSelfAdjoint { residual: f64, threshold: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("eigensolver did not converge on a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("map is not a chain map: residual {residual:.3e} in degree {degree}")]
    NotChainMap { degree: usize, residual: f64 },

    #[error("operator in degree {degree} is not unitary: residual {residual:.3e}")]
    NotUnitary { degree: usize, residual: f64 },

    #[error("signature requires an even-dimensional complex, got n = {0}")]
    OddDimension(usize),

    #[error("{operator} has a kernel: {kernel_rank} eigenvalue(s) within {threshold:.3e} of zero")]
    DegenerateOperator {
        operator: &'static str,
        kernel_rank: usize,
        threshold: f64,
    },

    #[error("duality is degenerate: smallest singular value of B_S is {min_singular_value:.3e}")]
    DegenerateDuality { min_singular_value: f64 },

    #[error("projection does not commute with the group action: {0}")]
    NonEquivariantProjection(String),

    #[error("K-theory classes live over different groups")]
    GroupMismatch,

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("boundary split is inconsistent: {0}")]
    SplitInconsistent(String),

    #[error("block identity {identity} violated: residual {residual:.3e}")]
    IdentityViolated { identity: &'static str, residual: f64 },

    #[error("restriction and closed form of the boundary duality disagree by {residual:.3e}")]
    FormulaMismatch { residual: f64 },

    #[error("boundary duality is degenerate: {0}")]
    DegenerateBoundaryDuality(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid facet: {0}")]
    InvalidFacet(String),

    #[error("orientation is incoherent: boundary of the fundamental chain is nonzero on {0} interior face(s)")]
    IncoherentOrientation(usize),

    #[error("vertex map of element {element} is not simplicial: {reason}")]
    NotSimplicial { element: usize, reason: String },

    #[error("element {0} reverses the orientation")]
    OrientationReversing(usize),

    #[error("element {element} fixes simplex {simplex:?} setwise but not pointwise; subdivide the triangulation first")]
    NonRegularAction { element: usize, simplex: Vec<u32> },

    #[error("equivariance violated: residual {residual:.3e} for element {element} in degree {degree}")]
    EquivarianceViolated {
        element: usize,
        degree: usize,
        residual: f64,
    },

    #[error("complex-with-boundary condition {condition} violated: {detail}")]
    BoundaryConditionViolated {
        condition: &'static str,
        detail: String,
    },

    #[error("signatures disagree: {0}")]
    CoincidenceFailed(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by numerical degeneracy rather than malformed input.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateOperator { .. }
                | Error::DegenerateDuality { .. }
                | Error::DegenerateBoundaryDuality(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
