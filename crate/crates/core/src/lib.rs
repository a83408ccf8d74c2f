pub mod cli;
pub mod codebook;
pub mod error;
pub mod json;
pub mod memory;
pub mod sequence;
pub mod sim;
pub mod vsa;
mod wire;

pub use error::{Error, Result};
pub use wire::{vector_from_bytes, vector_to_bytes};
