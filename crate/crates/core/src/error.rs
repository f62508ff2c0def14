use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "triple-photon expansion leaks {leakage:.3e} of its norm past Q = {cutoff} at gain {gamma} \
         (limit {limit:.1e}); raise the cutoff or lower the gain"
    )]
    Leakage {
        gamma: f64,
        cutoff: usize,
        leakage: f64,
        limit: f64,
    },

    #[error("integrator failed: {0}")]
    Integration(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
