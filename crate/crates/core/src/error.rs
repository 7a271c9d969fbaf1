use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Dempster combination is undefined when the sources fully disagree.
    #[error("total conflict between evidence sources (K = 1)")]
    TotalConflict,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::Error::InvalidArgument(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
