//! Command-line front end for the calling-convention workbench.

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;
