use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("singular design matrix: {0}")]
    SingularDesign(&'static str),
    #[error("degenerate support: {0}")]
    DegenerateSupport(&'static str),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

impl Error {
    /// Short machine-readable tag, used when a failure is recorded rather
    /// than propagated.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::SingularDesign(_) => "singular-design",
            Error::DegenerateSupport(_) => "degenerate-support",
            Error::DegenerateInput(_) => "degenerate-input",
        }
    }
}
