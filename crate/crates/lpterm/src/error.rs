use thiserror::Error;

use crate::frontend::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no filter entry for symbol {0}")]
    UnmappedSymbol(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported feature at {line}:{col}: {what}")]
    Unsupported { line: usize, col: usize, what: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("program is not well moded: {0}")]
    NotWellModed(Violation),
    #[error("heuristic cannot choose at the root position")]
    NoChoice,
}

pub type Result<T> = std::result::Result<T, Error>;
