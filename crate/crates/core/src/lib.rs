//! Continued-fraction costs, their enumeration over rationals, and the
//! weighted transfer operators that govern their distribution.

pub mod cf;
pub mod enumeration;
pub mod error;
pub mod operator;
pub mod stats;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
