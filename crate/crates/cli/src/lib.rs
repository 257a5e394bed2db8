//! Command-line front end: `report`, `simulate`, `plot` and `selfcheck`.

pub mod error;
pub mod output;
pub mod plot;
pub mod report;
pub mod selfcheck;
pub mod simulate;

pub use error::{CliError, CliResult};
