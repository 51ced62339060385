pub mod classical;
pub mod data;
pub mod diagnostics;
pub mod encodings;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod probe;
mod serde_float;
pub mod stats;

pub use error::{Error, Result};
pub use numerics::{Matrix, RandomStream};
