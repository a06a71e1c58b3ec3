//! Card-based secure computation: protocols over face-down playing cards,
//! and an exhaustive checker for their correctness and security.

pub mod analyzer;
pub mod cli;
pub mod deck;
pub mod error;
pub mod prob;
pub mod protocol;
pub mod script;
pub mod shuffle;

pub use error::{Error, Result};
pub use prob::Prob;
