use thiserror::Error;

/// Problems found while loading or validating a scenario document.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("no LoS edge from vertex {from} to vertex {to}")]
    MissingEdge { from: usize, to: usize },

    #[error("invalid path: {0}")]
    Path(String),

    /// A passive loop whose cascaded gain exceeds one; the scenario geometry
    /// violates the far-field model.
    #[error("negative-weight cycle reachable from vertex {source_vertex}: passive loop gain exceeds unity")]
    NegativeCycle { source_vertex: usize },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("barrier solver did not converge after {iterations} Newton steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A reported plan failed its post-hoc SNR check.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
