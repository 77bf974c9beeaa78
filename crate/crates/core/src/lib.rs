//! Exact enumeration and counting for the tandem-duplication process.

pub mod beta;
pub mod combin;
pub mod count;
pub mod dot;
pub mod error;
pub mod sim;
pub mod tree;
pub mod word;

pub use error::{Error, Result};
