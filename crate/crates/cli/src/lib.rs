//! Front end of the `mirror-spectra` binary: configuration, commands and
//! CSV/JSON/SVG output.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod verify;
