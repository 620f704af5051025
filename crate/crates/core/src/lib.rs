//! Nearest-neighbor sampling conditional independence test.

pub mod bench;
pub mod ccmi;
pub mod crt;
pub mod data;
pub mod error;
pub mod mi;
pub mod mlp;
pub mod sampler;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
