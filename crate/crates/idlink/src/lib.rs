//! Files, configuration and pipeline stages for the `idlink` command line,
//! on top of the numerical core in `idlink_core`.

pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;

pub use config::{Overrides, RunConfig};
pub use error::{Error, Result};
