use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(String),

    #[error("malformed indexed valuation: {0}")]
    MalformedValuation(String),

    #[error("a process set must have at least one member")]
    EmptyProcessSet,

    #[error("expansion would produce {count} members (limit {limit})")]
    TooLarge { count: u128, limit: u128 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("budget of {budget} steps exhausted before thread 0 produced a value: {detail}")]
    BudgetExhausted { budget: usize, detail: String },

    #[error("no thread can step and thread 0 is not a value: {0}")]
    Deadlock(String),

    #[error("functional `{name}` is undefined on result {value}")]
    FunctionalUndefined { name: String, value: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
