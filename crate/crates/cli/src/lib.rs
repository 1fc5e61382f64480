//! Driver for the verification suites: configuration, reports and plots.

pub mod config;
pub mod plot;
pub mod report;
pub mod suites;

pub use config::{Config, Suite};
pub use report::Report;
pub use suites::run;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod guide {}
