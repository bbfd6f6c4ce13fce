use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input is well formed but violates a structural model assumption,
    /// e.g. a channel that is not of the one-interfered-receiver type.
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("resource limit: {what} needs {required}, budget is {budget}")]
    ResourceLimit {
        what: String,
        required: u128,
        budget: u128,
    },
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    /// Malformed channel-spec text; positions are 1-based when known.
    #[error("parse error{}: {message}", location(*.line, *.column))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, required: u128, budget: u128) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            required,
            budget,
        }
    }
}

/// Returns `Err(ResourceLimit)` if `required > budget`.
pub(crate) fn check_budget(what: &str, required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::budget(what, required, budget))
    } else {
        Ok(())
    }
}

/// Checked `base^exp`, saturating to `u128::MAX` on overflow.
pub(crate) fn pow_saturating(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
