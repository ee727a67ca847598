use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires {expected} spatial dimensions, representation has {found}")]
    WrongSpatialDimension { expected: usize, found: usize },

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },

    #[error("basis is not trace-orthogonal (Gram residual {0:.3e}); representation is defective")]
    DefectiveBasis(f64),

    #[error("commutant of the transverse gamma matrices has dimension {0}, expected 2")]
    CommutantDimension(usize),

    #[error("eigenspace dimensions {plus}/{minus}, expected 2/2")]
    DegenerateEigenspace { plus: usize, minus: usize },

    #[error("representation fails the Clifford axioms (residual {0:.3e})")]
    InvalidRepresentation(f64),

    #[error("field is not independent of z (max variation {0:.3e})")]
    NotZIndependent(f64),

    #[error("source violates discrete continuity (residual {residual:.3e} at t = {time})")]
    ContinuityViolation { residual: f64, time: f64 },

    #[error("time step {dt} violates the CFL bound {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("chirality experiment requires m = 0, got m = {0}")]
    MassiveChirality(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
