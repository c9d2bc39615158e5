use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{operation} is not supported for {subject}")]
    Unsupported {
        operation: &'static str,
        subject: String,
    },
    #[error("inadmissible consumption: requested {requested} with only {available} stored")]
    Admissibility { requested: f64, available: f64 },
    #[error("value iteration did not converge after {iterations} sweeps (last span {span:e})")]
    NonConvergence { iterations: usize, span: f64 },
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}
