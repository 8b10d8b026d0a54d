use thiserror::Error;

/// Every failure mode of the library. Divergent norms are values (`f64::INFINITY`), not errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: {0}")]
    QuadratureNonconvergent(String),
    #[error("extension index estimate unstable (estimates {first} and {second})")]
    IndexUnstable { first: f64, second: f64 },
    #[error("composition not admissible: {0}")]
    NotAdmissible(String),
    #[error("function takes negative values")]
    NotNonnegative,
    #[error("profile is not quasi-concave: {0}")]
    NotQuasiconcave(String),
    #[error("grid index {0} outside the supported range |k| <= 40")]
    OverflowRange(i64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("case gate failed: {0}")]
    CaseGateFailed(String),
    #[error("trivial space: {0}")]
    Triviality(String),
    #[error("indices violate hypothesis: {0}")]
    IndicesViolateHypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for the gate-type failures that negative controls are expected to trigger.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            Error::HypothesisViolated(_)
                | Error::IndicesViolateHypothesis(_)
                | Error::CaseGateFailed(_)
                | Error::Triviality(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
