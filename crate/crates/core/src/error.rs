use thiserror::Error;

/// Errors raised by the analytic engine, the probe model, the simulator and
/// the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: [{left}] vs [{right}]")]
    BasisMismatch { left: String, right: String },

    #[error("invalid ket: {0}")]
    InvalidKet(String),

    #[error("ket has zero norm")]
    ZeroNorm,

    #[error("ket is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("post-selection is orthogonal: overlap {which} vanishes")]
    OrthogonalPostSelection { which: &'static str },

    #[error("basis is not complete and orthonormal (max deviation {deviation:e})")]
    IncompleteBasis { deviation: f64 },

    #[error("observable axis is not a member of the supplied basis")]
    AxisNotInBasis,

    #[error("Bargmann product ⟨ψ|z⟩⟨z|a⟩⟨a|ψ⟩ vanishes; loop phase undefined")]
    DegenerateLoop,

    #[error("invalid label {label:?} for {role}")]
    InvalidLabel { label: String, role: &'static str },

    #[error("post-selected probe wave has zero norm at port {port}")]
    ZeroNormPort { port: &'static str },

    #[error("both output ports are dark")]
    BothPortsDark,

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient samples: need at least {needed}, have {have}")]
    InsufficientSamples { needed: u64, have: u64 },

    #[error("coupling g = 0 cannot be inverted")]
    ZeroCoupling,

    #[error("denominator of {formula} is statistically indistinguishable from zero ({value:e} vs se {se:e})")]
    DegenerateDenominator { formula: &'static str, value: f64, se: f64 },

    #[error("accumulators come from mismatched runs: {0}")]
    MismatchedRuns(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
