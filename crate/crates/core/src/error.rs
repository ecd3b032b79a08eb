use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {n}")]
    NotCoprime { a: i64, n: u64 },

    #[error("the splitting identity needs a denominator of at least 2")]
    SplitAtOne,

    #[error("residual {0} is an integer; there is no prime power to clear")]
    IntegerResidual(Rational),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("no subset of the {pool}-element pool clears q = {q}")]
    NoSubsetFound { q: u64, pool: usize },

    #[error("infeasible at this scale ({stage}): {diagnostic}")]
    InfeasibleAtScale { stage: String, diagnostic: String },

    #[error("final residual {0} is nonzero")]
    ResidualNonzero(Rational),

    #[error("search budget exceeded after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },

    #[error("not a representation: {0}")]
    NotARepresentation(String),

    #[error("value out of supported range: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
