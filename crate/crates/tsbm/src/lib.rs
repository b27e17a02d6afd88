//! File formats, parallel fitting, the benchmark harness and the `tsbm`
//! command-line tool built on [`tsbm_core`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod io;
pub mod manifest;

pub use error::{Error, Result};
