use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a {n_sites}-site register")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not an involution (max deviation {deviation:.3e})")]
    NotInvolution { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("measurement operators are not complete (max deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("direction vector has norm {norm}, expected 1")]
    NonUnitVector { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("subsystem selection is empty")]
    EmptySubsystem,

    #[error("{n_sites} sites exceeds the dense limit of {max}")]
    TooLarge { n_sites: usize, max: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("ground state is degenerate (spectral gap {gap:.3e})")]
    DegenerateGroundState { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical identity or bound, as opposed to bad input.
    pub fn is_invariant_failure(&self) -> bool {
        matches!(
            self,
            Error::Invariant(_) | Error::NoConvergence { .. } | Error::DegenerateGroundState { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
