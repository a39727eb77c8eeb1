use thiserror::Error;

/// Errors raised by state construction, optical elements, measurements and protocols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("source amplitudes not normalized: |alpha|^2 + |beta|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("mode label '{0}' appears in both operands")]
    ModeCollision(String),
    #[error("mode sets differ: {left:?} vs {right:?}")]
    ModeMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown mode '{0}'")]
    UnknownMode(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("occupation of mode '{mode}' exceeds n_max = {n_max}")]
    OccupationOverflow { mode: String, n_max: u32 },
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("non-diagonal polarization unitary on multi-photon occupation of mode '{0}'")]
    UnsupportedMultiPhoton(String),
    #[error("polarization measurement of mode '{mode}' is ill-defined: a ket holds {photons} photons there")]
    NotSinglePhoton { mode: String, photons: u32 },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("degenerate protocol: {0}")]
    DegenerateProtocol(String),
    #[error("unsupported protocol: {0}")]
    UnsupportedProtocol(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
