//! Weighted composition operators between Fock spaces on C^n.

pub mod carleson;
pub mod corpus;
pub mod error;
pub mod funcspace;
pub mod linalg;
pub mod oracle;
pub mod quad;
pub mod search;
pub mod wco;

pub use error::{Error, Result};
