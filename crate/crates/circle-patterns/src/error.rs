use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("INVALID_ANGLES: {0}")]
    InvalidAngles(String),
    #[error("INVALID_MESH: {0}")]
    InvalidMesh(String),
    #[error("NON_CONVERGENCE: residual {residual:e} after {iters} iterations")]
    NonConvergence { residual: f64, iters: usize },
    #[error("INCONSISTENT_ZERO_ANGLE: zero-angle edge {0} requires a nonzero radius shift")]
    InconsistentZeroAngle(usize),
    #[error("DEGENERATE_LAYOUT: {0}")]
    DegenerateLayout(String),
    #[error("DEGENERATE_CROSS_RATIO: edge {0}")]
    DegenerateCrossRatio(usize),
    #[error("BRANCH_ERROR: Im tau = {0} <= 0")]
    BranchError(f64),
    #[error("EUCLIDEAN_DEGENERATE: zero translation part")]
    EuclideanDegenerate,
    #[error("EUCLIDEAN_POINT: holonomy formula undefined at (A1,A2) = (0,0)")]
    EuclideanPoint,
    #[error("UNWRAP_FAILURE: argument step {0} too large; increase the sample count")]
    UnwrapFailure(f64),
    #[error("NOT_IN_W: vertex-sum residual {0}")]
    NotInW(f64),
    #[error("SINGULAR_LAPLACIAN")]
    SingularLaplacian,
    #[error("PARSE_ERROR: {0}")]
    Parse(String),
    #[error("CHECK_FAILURE: {0}")]
    CheckFailure(String),
    #[error("IO_ERROR: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 validation, 3 solver, 4 numerical check.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidAngles(_) | Error::InvalidMesh(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::NonConvergence { .. }
            | Error::InconsistentZeroAngle(_)
            | Error::DegenerateLayout(_)
            | Error::SingularLaplacian => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
