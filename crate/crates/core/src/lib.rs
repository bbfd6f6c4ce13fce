//! Nested coset codes over prime fields, classical-quantum channel models,
//! achievable-region evaluators and exact small-blocklength square-root decoders
//! for three-user interference channels where only receiver 1 sees interference.

pub mod channel;
pub mod classical;
pub mod codes;
pub mod error;
pub mod field;
pub mod linalg;
pub mod povm;
pub mod region;
pub mod spec_file;
pub mod typicality;

pub use error::{Error, Result};
