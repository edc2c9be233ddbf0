use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate form: {0}")]
    DegenerateForm(String),
    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric (residual {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("matrix is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("polynomial degree {0} exceeds the maximum of 8")]
    DegreeOverflow(usize),
    #[error("function is not integrable: {0}")]
    NotIntegrable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid specifications differ")]
    GridMismatch,
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),
    #[error("grid is not commensurate with the kernel: {0}")]
    IncommensurateGrid(String),
    #[error("function is not normalized (integral {0})")]
    NotNormalized(f64),
    #[error("Darboux map does not match the form parameters")]
    DarbouxMismatch,
    #[error("invalid weights: {0}")]
    WeightError(String),
    #[error("side condition {0} violated")]
    SideConditionViolated(String),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not symmetric positive definite")]
    NotSPD,
    #[error("operand is not a pure Gaussian (polynomial degree {0})")]
    NotGaussian(usize),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
