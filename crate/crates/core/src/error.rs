use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite component in {0}")]
    NonFinite(&'static str),
    #[error("velocity magnitude {0} is not below the speed of light")]
    VelocityNotSubluminal(f64),
    #[error("invalid eta: {0}")]
    InvalidEta(String),
    #[error("boost axis has Euclidean length {0}, expected 1")]
    AxisNotNormalized(f64),
    #[error("hyperplanes are not parallel (normal mismatch {0:e})")]
    HyperplanesNotParallel(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("tabulated masses must be strictly increasing (node {0})")]
    NonMonotoneGrid(usize),
    #[error("negative spectral density at node {0}")]
    NegativeDensity(usize),
    #[error("negative mass at node {0}")]
    NegativeMass(usize),
    #[error("momentum must be space-like or zero (got s = {0})")]
    SpacelikeMomentumRequired(f64),
    #[error("spectral support reaches zero mass; the lifetime integrand has a 1/mu factor")]
    SupportTouchesZeroMass,
    #[error("sharp mass spectrum: the lifetime is infinite")]
    InfiniteLifetime,
    #[error("survival probability tail is not decaying: {0}")]
    TailNotDecaying(String),
    #[error("invalid SLM label: {0}")]
    InvalidLabel(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
