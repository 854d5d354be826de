//! File formats, example bundles and the command-line front end for
//! [`fotf_core`].

pub mod bundles;
pub mod cli;
mod error;
pub mod io;

pub use error::CliError;
