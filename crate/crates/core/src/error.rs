use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pole at input: {0}")]
    Pole(&'static str),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("point swallowed at t = {0}")]
    Swallowed(f64),
    #[error("time horizon exceeded: requested {requested}, available {available}")]
    Horizon { requested: f64, available: f64 },
    #[error("zipper failure at vertex {vertex}: {reason}")]
    Zipper { vertex: usize, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
