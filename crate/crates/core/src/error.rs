use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitianInput { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("operands live on different algebras: {0}")]
    AlgebraMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("element is not a projection")]
    NotProjection,
    #[error("form is not faithful (rank-deficient density in block {block})")]
    NotFaithful { block: usize },
    #[error("reference vector has a singular block")]
    SingularOmega,
    #[error("density is singular; the closed-form optimizer needs full rank")]
    SingularDensity,
    #[error("commutation criteria disagree: {0}")]
    InconsistentCriteria(String),
    #[error("U is not a partial isometry with the required initial projection: {0}")]
    BadIsometry(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid tolerance policy: {0}")]
    InvalidPolicy(String),
    #[error("unknown property suite `{0}`")]
    UnknownSuite(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by mathematically invalid input, as opposed
    /// to parse problems or internal inconsistencies.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::NonHermitianInput { .. }
                | Error::NotPositive { .. }
                | Error::AlgebraMismatch(_)
                | Error::Shape(_)
                | Error::NonFinite
                | Error::NotProjection
                | Error::NotFaithful { .. }
                | Error::SingularOmega
                | Error::SingularDensity
                | Error::BadIsometry(_)
                | Error::Domain(_)
                | Error::InvalidPolicy(_)
        )
    }
}
