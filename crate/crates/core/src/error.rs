use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid database: {0}")]
    Database(String),

    #[error("non-finite value in series `{series}` at position {position}")]
    NonFinite { series: String, position: usize },

    #[error("invalid probability distribution: {0}")]
    Distribution(String),

    #[error("probability {0} makes the logarithm undefined")]
    DegenerateProbability(f64),

    #[error("Lambert W0 is undefined at {0} (below -1/e)")]
    LambertDomain(f64),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("infeasible plant: {0}")]
    InfeasiblePlant(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
