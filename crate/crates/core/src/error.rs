use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid `{field}`: {constraint}")]
    Invariant { field: String, constraint: String },

    #[error("unknown scenario kind `{0}`")]
    UnknownKind(String),

    #[error("wrong scenario kind: expected {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    /// Pr(A=1) is 0 or 1, so an estimand conditional on treatment arm is undefined.
    #[error("degenerate population: {0}")]
    Degenerate(String),

    /// E(Y | A=a, level) is undefined because Pr(A=a, level) = 0 while the level has mass.
    #[error("undefined stratum: no units with A={arm} at {level}")]
    UndefinedStratum { arm: u8, level: String },

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("scenario has no outcome law and its outcome is not binary")]
    MissingOutcomeLaw,

    #[error("outcome is not binary: {0}")]
    NonBinaryOutcome(String),

    #[error("non-positive treatment probability at {0}")]
    NonPositiveCell(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

/// Coarse grouping used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: syntax, invariant, wrong kind, violated premise.
    Validation,
    /// A conditioning event has probability zero.
    Degenerate,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Degenerate(_) | Error::UndefinedStratum { .. } | Error::ZeroDenominator(_) => {
                ErrorClass::Degenerate
            }
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn invariant(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}
