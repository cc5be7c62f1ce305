use thiserror::Error;

/// Errors raised by the analytic model, samplers and topology builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },
    #[error("unstable queue: utilization {rho} is not below 1")]
    Unstable { rho: f64 },
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Domain {
            name,
            reason: reason.into(),
        }
    }
}

/// Errors raised while running a replication.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("expected source parameters for {expected} clusters, got {got}")]
    SourceCount { expected: usize, got: usize },
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by configuration loading.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

/// Errors raised by sweep execution and output writing.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
