use thiserror::Error;

/// Errors raised by field analysis, assembly, eigensolves and gap analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain area {area} does not match the lattice covolume {covolume}")]
    DomainNotFundamental { area: f64, covolume: f64 },

    #[error("no magnetic well: the sublevel set has no component interior to the domain")]
    NoWells,

    #[error("adaptive quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("grid spacing {spacing} exceeds the magnetic length {length} (h = {h}, k = {k})")]
    GridTooCoarse { spacing: f64, length: f64, h: f64, k: u32 },

    #[error("assembled matrix is not Hermitian (defect {defect:e})")]
    NonHermitianAssembly { defect: f64 },

    #[error("truncation too small: {reason}")]
    TruncationTooSmall { reason: String },

    #[error("eigenpair {index} did not converge (residual {residual:e})")]
    NoConvergence { index: usize, residual: f64 },

    #[error("factorization hit a zero pivot at row {row} (shift {shift})")]
    SingularShift { row: usize, shift: f64 },

    #[error("the field never reaches the level {target} along the search ray")]
    NoLevelSet { target: f64 },

    #[error("cutoff clips {mass:e} of the profile mass (limit {limit:e})")]
    CutoffClipped { mass: f64, limit: f64 },

    #[error("quasimode support is not interior to the grid: {reason}")]
    SupportNotInterior { reason: String },

    #[error("insufficient samples for a slope fit: {reason}")]
    InsufficientSamples { reason: String },

    #[error("vector of length {vector} does not live on a grid with {nodes} nodes")]
    GridMismatch { vector: usize, nodes: usize },

    #[error("window up to {threshold:e} is not exhausted (largest computed eigenvalue {largest:e})")]
    WindowNotExhausted { threshold: f64, largest: f64 },

    #[error("resolution {delta:e} is finer than the discretization error {error:e}")]
    ResolutionTooFine { delta: f64, error: f64 },

    #[error("no integer momentum admissible at h = {h}; admissibility is guaranteed for h <= {max_h:e}")]
    NoAdmissibleInteger { h: f64, max_h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}
