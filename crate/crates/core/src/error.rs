use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot build complex: {0}")]
    Build(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("point {0:?} lies outside the realized complex")]
    OutsideComplex(Vec<f64>),
    #[error("unknown element {0}")]
    Lookup(usize),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("inconsistent map: {0}")]
    Consistency(String),
    #[error("cannot evaluate function: {0}")]
    Evaluation(String),
    #[error("level mismatch: expected {expected} values, got {got}")]
    Level { expected: usize, got: usize },
    #[error("inadmissible Dirac operator: {0}")]
    Admissibility(String),
    #[error("operand has mixed parity")]
    Parity,
    #[error("graded trace of the density matrix vanishes")]
    Normalization,
    #[error("model too small: {0}")]
    Size(String),
    #[error("invalid metric weight: {0}")]
    Metric(String),
    #[error("cannot synthesize stencil: {0}")]
    Synthesis(String),
    #[error("cannot estimate rate: {0}")]
    Rate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation errors are caused by the caller's input; everything else is
    /// a failure of the computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Build(_)
                | Error::Lookup(_)
                | Error::Level { .. }
                | Error::Admissibility(_)
                | Error::Size(_)
                | Error::Metric(_)
                | Error::Synthesis(_)
                | Error::Invalid(_)
                | Error::Json(_)
                | Error::Evaluation(_)
                | Error::OutsideComplex(_)
        )
    }
}
