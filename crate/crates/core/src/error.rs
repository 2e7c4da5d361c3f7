use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("unsupported K = {0}: {1}")]
    UnsupportedK(f64, String),
    #[error("ill-conditioned system (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("series coefficients lost too much precision (cancellation factor {0:.3e})")]
    TruncationUnstable(f64),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("normalization factor {0} deviates by more than 1% from 1")]
    NormalizationDrift(f64),
    #[error("MCMC effective sample size {ess:.1} below threshold {threshold:.1}")]
    McmcNotConverged { ess: f64, threshold: f64 },
    #[error("point is not on the probability simplex")]
    OffSimplex,
    #[error("variance is degenerate")]
    DegenerateVariance,
    #[error("empty sample")]
    EmptySample,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
