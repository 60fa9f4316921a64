use thiserror::Error;

#[derive(Debug, Error)]
pub enum MhdError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-positive density {rho:e} at {location}")]
    NonPositiveDensity { rho: f64, location: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("simulation aborted at t = {t:.6e}: {reason}")]
    Aborted { t: f64, reason: String },

    #[error("linear solver did not converge: {0}")]
    Solver(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl MhdError {
    /// Process exit code: 1 for validation problems, 2 for runtime aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            MhdError::InvalidConfig(_)
            | MhdError::UnknownName { .. }
            | MhdError::Toml(_)
            | MhdError::Mesh(_)
            | MhdError::Domain(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, MhdError>;
