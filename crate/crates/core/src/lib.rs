pub mod analysis;
pub mod coverage;
pub mod dataset;
pub mod deployment;
pub mod ensemble;
pub mod error;
pub mod mlp;
pub mod mt;
pub mod seed;

pub use error::{Error, Result};
