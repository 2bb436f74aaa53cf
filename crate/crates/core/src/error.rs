use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds tolerance)")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rate {re}{im:+}i does not decay (real part must be positive)")]
    NonDecayingRate { re: f64, im: f64 },

    #[error("spectral point {re}{im:+}i is not supported here: {reason}")]
    UnsupportedSpectralPoint { re: f64, im: f64, reason: &'static str },

    #[error("input is not in the range of the closure (derivative trace {residual:.3e})")]
    NotInRange { residual: f64 },

    #[error("element is not in the domain of extension `{extension}`")]
    NotInDomain { extension: String },

    #[error("eps = {0} outside the supported range [1e-5, 0.5]")]
    EpsOutOfRange(f64),

    #[error("consistency check failed: {what} (residual {residual:.3e})")]
    ConsistencyFailure { what: &'static str, residual: f64 },

    #[error("probe images have rank {rank}, deficiency index is {needed}")]
    InsufficientProbes { rank: usize, needed: usize },

    #[error("reconstructed parameter is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("Richardson extrapolation did not settle (estimate {estimate:.3e})")]
    ExtrapolationDivergence { estimate: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
