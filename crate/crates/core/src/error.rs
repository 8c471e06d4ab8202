use thiserror::Error;

/// Library-wide error type.
///
/// The variants map one-to-one onto the CLI exit-code contract: `Domain` and
/// `InvalidInput` are input problems (exit 2), `Numerical` is a numerical
/// failure (exit 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A user-supplied value violates a structural invariant.
    #[error("invalid {field}: {msg}")]
    InvalidInput { field: &'static str, msg: String },

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numerical failure in {op}: {msg}")]
    Numerical { op: &'static str, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(field: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            msg: msg.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            msg: msg.into(),
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
