//! Termination analysis of definite logic programs through a transformation
//! into term rewrite systems and the dependency pair framework.

pub mod dp;
pub mod error;
pub mod filter;
pub mod frontend;
pub mod oracle;
pub mod prove;
pub mod refine;
pub mod term;
pub mod transform;
pub mod typing;
pub mod unify;

pub use error::{Error, Result};
