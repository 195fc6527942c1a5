//! Batch front end: problem files in, JSON or text reports out.

pub mod commands;
pub mod schema;
pub mod verify;
