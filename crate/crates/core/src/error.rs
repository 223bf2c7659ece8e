use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock space dimension {0} (need at least 2)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock space of dimension {dim} cannot hold photon number {needed}")]
    TruncationTooSmall { dim: usize, needed: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown model variant `{0}`")]
    UnknownVariant(String),

    #[error("integrator step size underflow at t = {t:e} (h = {h:e}, error norm {err:e})")]
    StepSizeUnderflow { t: f64, h: f64, err: f64 },

    #[error("steady state is not unique: null space dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("pole of the gamma function at z = {0}")]
    GammaPole(f64),

    #[error("Pochhammer pole: ({z})_k vanishes at k = {k}")]
    PochhammerPole { z: String, k: usize },

    #[error("series did not converge after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("moment order l + k = {0} exceeds the supported maximum of 4")]
    MomentOrder(usize),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("quantum Fisher information must be positive, got {0}")]
    NonPositiveFisher(f64),

    #[error("measurement signal vanishes: d<M>/dchi = {0:e}")]
    VanishingSignal(f64),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("objective is flat over the search bracket")]
    FlatObjective,

    #[error("scaling fit needs at least 4 points spanning a decade, got {points} points spanning {span:.3} decades")]
    InsufficientSpan { points: usize, span: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
