pub mod cbc;
pub mod cli;
pub mod digitspace;
pub mod error;
pub mod gfpoly;
pub mod kernel;
pub mod rule_io;
pub mod spectral;

pub use error::{Error, Result};
