//! File formats, a sharded search runner and the `dhl` command line on top of `dhl-core`.

pub mod cli;
pub mod format;
pub mod runner;
