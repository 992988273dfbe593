//! File formats, the trained-machine store and the `taptest` command line
//! around `taptest-core`.

pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod plot;
pub mod wav;

pub use error::{Error, Result};
