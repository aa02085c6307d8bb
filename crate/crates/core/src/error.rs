use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tensor layout: {0}")]
    InvalidLayout(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm:.6e})")]
    NotNormalized { norm: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("density matrix has trace {trace:.12} instead of 1")]
    BadTrace { trace: f64 },
    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },
    #[error("factor index {index} out of range for a layout with {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },
    #[error("partial trace needs at least one kept factor")]
    EmptyKeepSet,
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("expected {expected} tensor factors, found {found}")]
    FactorCount { expected: usize, found: usize },
    #[error("branch lists disagree in length ({0})")]
    BranchCount(String),
    #[error("branch index {index} out of range for {branches} branches")]
    BranchOutOfRange { index: usize, branches: usize },
    #[error("spin bath of {spins} spins exceeds the dense evolution limit of {max}")]
    BathTooLarge { spins: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("flat dimension {dim} exceeds the limit of {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("site {site} out of range 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("link {link} out of range 1..={sites}")]
    LinkOutOfRange { link: usize, sites: usize },
    #[error("interior must exclude the boundary link {link}")]
    BoundaryInInterior { link: usize },
    #[error("state carries weight {weight:.3e} outside the physical subspace")]
    OutsideKernel { weight: f64 },
    #[error("state is not a charge eigenstate")]
    NotChargeEigenstate,
    #[error("both states lie in charge sector {0}")]
    SameSector(i64),

    #[error("expected a quantity of dimension {expected}, found {found}")]
    WrongDimension { expected: String, found: String },
    #[error("volume must be nonnegative, got {0}")]
    NegativeVolume(f64),
    #[error("electric field must be nonzero")]
    ZeroField,
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
