//! The dependency pair framework for infinitary constructor rewriting.

pub mod graph;
pub mod pairs;
pub mod poly;
pub mod processors;
