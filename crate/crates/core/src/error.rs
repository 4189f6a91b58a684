use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("series did not converge after {terms} terms (last term/sum = {ratio:e})")]
    NonConvergence { terms: usize, ratio: f64 },

    #[error("accuracy loss: only {digits:.1} reliable significant digits")]
    AccuracyLoss { digits: f64 },

    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {abs_err:e}")]
    Quadrature { value: f64, abs_err: f64 },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
