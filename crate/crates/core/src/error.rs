use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Closed forms exist only for `d` in {2, 3}; callers should fall back
    /// to the series oracle and the numeric solver.
    #[error("no closed form for {scheme}; use the numeric method")]
    UnsupportedClosedForm { scheme: String },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
